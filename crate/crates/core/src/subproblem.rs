//! Exact block subproblem: minimize `F(z) + θ/2‖z − x‖²` with `z` pinned to
//! `x` outside a working set `B`, by enumerating all `2^|B|` zero/nonzero
//! patterns inside `B` and solving each restricted quadratic.

use crate::error::{check_len, Error, Result};
use crate::linalg::{solve_spd, SingularPolicy};
use crate::problem::{nnz, CompositeProblem, SparsityTerm};
use crate::{Matrix, Vector};

/// Largest block the enumerator accepts.
pub const MAX_BLOCK: usize = 30;
/// Objectives closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Ascending, duplicate-free coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorkingSet(Vec<usize>);

impl WorkingSet {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() || indices.len() > n {
            return Err(Error::invalid(format!(
                "working set size {} outside [1, {n}]",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("working set has repeated indices"));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::invalid(format!(
                    "index {last} out of range for n = {n}"
                )));
            }
        }
        Ok(Self(indices))
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct BlockSolveResult {
    pub x_next: Vector,
    /// Bit `j` set iff `B[j]` is free (nonzero candidate) in the chosen pattern.
    pub pattern: u32,
    /// `F(x_next) + θ/2‖x_next − x‖²`.
    pub objective: f64,
    /// `F(x_next)`.
    pub composite: f64,
    /// `F(x_next) − F(x)`, accumulated from the exact quadratic change.
    pub delta: f64,
    pub patterns_evaluated: usize,
    /// False when the input point was kept.
    pub moved: bool,
}

/// Globally solves the proximal block subproblem over `block`.
pub fn solve_block(
    prob: &CompositeProblem,
    x: &Vector,
    block: &WorkingSet,
    theta: f64,
) -> Result<BlockSolveResult> {
    if !(theta > 0.0) {
        return Err(Error::invalid("theta must be positive"));
    }
    let state = PointState::new(prob, x)?;
    minimize_block(prob, x, &state, block, theta, SingularPolicy::Fail)
}

/// `f(x)` and `∇f(x)`, computed once and shared by the block solves at `x`.
#[derive(Debug, Clone)]
pub struct PointState {
    pub value: f64,
    pub gradient: Vector,
}

impl PointState {
    pub fn new(prob: &CompositeProblem, x: &Vector) -> Result<Self> {
        let value = prob.objective.value(x)?;
        let gradient = prob.objective.gradient(x)?;
        Ok(Self { value, gradient })
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    objective: f64,
    nnz: usize,
    mask: u32,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        if self.objective < other.objective - TIE_TOL {
            return true;
        }
        if self.objective > other.objective + TIE_TOL {
            return false;
        }
        (self.nnz, self.mask) < (other.nnz, other.mask)
    }
}

/// Block solve with `theta ≥ 0` and a caller-chosen policy for singular
/// restricted systems. `state` must describe `x`.
pub fn minimize_block(
    prob: &CompositeProblem,
    x: &Vector,
    state: &PointState,
    block: &WorkingSet,
    theta: f64,
    policy: SingularPolicy,
) -> Result<BlockSolveResult> {
    let n = prob.n();
    check_len(n, x.len())?;
    let k = block.len();
    if k > MAX_BLOCK {
        return Err(Error::BlockTooLarge(k));
    }
    let idx = block.indices();
    if idx.last().is_some_and(|&i| i >= n) {
        return Err(Error::invalid("working set index out of range"));
    }
    let total_nnz = nnz(x.as_slice());
    let x_b = Vector::from_fn(k, |r, _| x[idx[r]]);
    let nnz_b = nnz(x_b.as_slice());
    let outside_nnz = total_nnz - nnz_b;
    let budget = match prob.term {
        SparsityTerm::Cardinality(s) => {
            if total_nnz > s {
                return Err(Error::Infeasible(format!(
                    "‖x‖₀ = {total_nnz} exceeds s = {s}"
                )));
            }
            Some(s - outside_nnz)
        }
        SparsityTerm::Penalty(_) => None,
    };
    let h_of = |block_nnz: usize| -> f64 {
        match prob.term {
            SparsityTerm::Cardinality(_) => 0.0,
            SparsityTerm::Penalty(l) => l * (outside_nnz + block_nnz) as f64,
        }
    };

    let q_bb = prob.objective.gram_block(idx);
    let g_b = Vector::from_fn(k, |r, _| state.gradient[idx[r]]);
    // z_S solves (Q_SS + θI) z = θ x_S + c_S, c = Q_BB x_B − g_B.
    let c_b = &q_bb * &x_b - &g_b;
    let f_x = state.value;
    let composite_x = f_x + h_of(nnz_b);

    let current_mask = (0..k)
        .filter(|&j| x_b[j] != 0.0)
        .fold(0u32, |m, j| m | (1 << j));
    let mut best = Candidate {
        objective: composite_x,
        nnz: nnz_b,
        mask: current_mask,
    };
    let mut best_z: Option<Vector> = None;
    let mut best_delta = 0.0;
    let mut evaluated = 0usize;

    let mut free = Vec::with_capacity(k);
    let mut d = Vector::zeros(k);
    for mask in 0..(1u64 << k) {
        let mask = mask as u32;
        let size = mask.count_ones() as usize;
        if budget.is_some_and(|b| size > b) {
            continue;
        }
        evaluated += 1;
        free.clear();
        free.extend((0..k).filter(|&j| mask & (1 << j) != 0));

        let mut sys = Matrix::from_fn(size, size, |r, c| q_bb[(free[r], free[c])]);
        for r in 0..size {
            sys[(r, r)] += theta;
        }
        let rhs = Vector::from_fn(size, |r, _| theta * x_b[free[r]] + c_b[free[r]]);
        let z_s = solve_spd(sys, &rhs, policy)?;

        d.copy_from(&(-&x_b));
        for (r, &j) in free.iter().enumerate() {
            d[j] += z_s[r];
        }
        let df = g_b.dot(&d) + 0.5 * d.dot(&(&q_bb * &d));
        let z_nnz = nnz(z_s.as_slice());
        let prox = 0.5 * theta * d.norm_squared();
        let cand = Candidate {
            objective: f_x + df + h_of(z_nnz) + prox,
            nnz: z_nnz,
            mask,
        };
        if cand.beats(&best) {
            best = cand;
            best_delta = df;
            let mut z_b = Vector::zeros(k);
            for (r, &j) in free.iter().enumerate() {
                z_b[j] = z_s[r];
            }
            best_z = Some(z_b);
        }
    }

    match best_z {
        Some(z_b) if best.objective <= composite_x => {
            let mut x_next = x.clone();
            for (r, &i) in idx.iter().enumerate() {
                x_next[i] = z_b[r];
            }
            Ok(BlockSolveResult {
                composite: f_x + best_delta + h_of(best.nnz),
                delta: best_delta + (h_of(best.nnz) - h_of(nnz_b)),
                objective: best.objective,
                x_next,
                pattern: best.mask,
                patterns_evaluated: evaluated,
                moved: true,
            })
        }
        _ => Ok(BlockSolveResult {
            x_next: x.clone(),
            pattern: current_mask,
            objective: composite_x,
            composite: composite_x,
            delta: 0.0,
            patterns_evaluated: evaluated,
            moved: false,
        }),
    }
}

/// Solves `(Q_SS + θI) z = θ·anchor_S − p_S − Q_{S,R}·x_fixed_R`, `R` the
/// complement of `S`. Coordinates the caller wants pinned to zero must be zero
/// in `x_fixed`.
pub fn restricted_minimize(
    prob: &CompositeProblem,
    free: &[usize],
    x_fixed: &Vector,
    anchor: &Vector,
    theta: f64,
) -> Result<Vector> {
    restricted_minimize_with(prob, free, x_fixed, anchor, theta, SingularPolicy::Fail)
}

pub fn restricted_minimize_with(
    prob: &CompositeProblem,
    free: &[usize],
    x_fixed: &Vector,
    anchor: &Vector,
    theta: f64,
    policy: SingularPolicy,
) -> Result<Vector> {
    let n = prob.n();
    check_len(n, x_fixed.len())?;
    check_len(n, anchor.len())?;
    if free.is_empty() {
        return Err(Error::invalid("restricted set must be nonempty"));
    }
    if free.iter().any(|&i| i >= n) {
        return Err(Error::invalid("restricted index out of range"));
    }
    if !(theta >= 0.0) {
        return Err(Error::invalid("theta must be nonnegative"));
    }
    let obj = &prob.objective;
    let mut rest = x_fixed.clone();
    for &i in free {
        rest[i] = 0.0;
    }
    let coupling = obj.gram_rows_times(free, &rest);
    let size = free.len();
    let mut sys = obj.gram_block(free);
    for r in 0..size {
        sys[(r, r)] += theta;
    }
    let rhs = Vector::from_fn(size, |r, _| {
        theta * anchor[free[r]] - obj.linear_entry(free[r]) - coupling[r]
    });
    solve_spd(sys, &rhs, policy)
}
