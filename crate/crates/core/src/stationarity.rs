//! Optimality conditions for `min f + h` and a landscape counter.
//!
//! Three nested conditions are checked here:
//! - *basic*: `x` minimizes `f` over vectors supported on `supp(x)`;
//! - *L-stationary*: `x` is a fixed point of the step-`1/L` proximal-gradient
//!   map;
//! - *block-k*: no `k`-coordinate block of `x` can be re-optimized (globally,
//!   over every zero/nonzero pattern) to lower `F`.
//!
//! For a cardinality constraint the block condition starts at `k = 2`; for the
//! penalty it starts at `k = 1`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::linalg::SingularPolicy;
use crate::problem::{nnz, support, CompositeProblem, Extended, SparsityTerm};
use crate::rng::seeded;
use crate::subproblem::{minimize_block, restricted_minimize_with, PointState, WorkingSet};
use crate::working_set::{binomial, random_set, Combinations};
use crate::Vector;

/// Absolute tolerance on gradient and coordinate tests.
pub const COORD_TOL: f64 = 1e-8;
/// Relative tolerance on block improvements.
pub const BLOCK_TOL: f64 = 1e-9;
/// Largest `C(n, k) · 2^k` an exhaustive block check will attempt.
pub const EXHAUSTIVE_BUDGET: f64 = 1e8;
/// Largest number of supports [`enumerate_basic_points`] will visit.
pub const ENUMERATION_BUDGET: f64 = 1e6;
const DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockCheckMode {
    Exhaustive,
    /// `trials` uniformly drawn blocks. Passing only means no violation was
    /// found.
    Sampled {
        trials: usize,
        seed: u64,
    },
}

/// Restricted minimality of `f` on `supp(x)`: the gradient vanishes there.
pub fn is_basic(prob: &CompositeProblem, x: &Vector, tol: f64) -> Result<bool> {
    check_len(prob.n(), x.len())?;
    if !prob.is_feasible(x) {
        return Ok(false);
    }
    let g = prob.objective.gradient(x)?;
    Ok(support(x.as_slice()).into_iter().all(|i| g[i].abs() <= tol))
}

/// Fixed point of `x ↦ prox(x − ∇f(x)/L)`, with ties in the top-`s` selection
/// treated as set-valued.
pub fn is_l_stationary(prob: &CompositeProblem, x: &Vector, l: f64, tol: f64) -> Result<bool> {
    check_len(prob.n(), x.len())?;
    if !(l > 0.0) {
        return Err(Error::invalid("L must be positive"));
    }
    let g = prob.objective.gradient(x)?;
    match prob.term {
        SparsityTerm::Cardinality(s) => {
            let supp = support(x.as_slice());
            if supp.len() > s || supp.iter().any(|&i| g[i].abs() > tol) {
                return Ok(false);
            }
            // Off the support the shifted vector is −g/L.
            let off_max = (0..x.len())
                .filter(|&i| x[i] == 0.0)
                .map(|i| (g[i] / l).abs())
                .fold(0.0, f64::max);
            if supp.len() < s {
                // Any top-s selection would pick up the largest off-support entry.
                return Ok(off_max <= tol);
            }
            let on_min = supp
                .iter()
                .map(|&i| x[i].abs())
                .fold(f64::INFINITY, f64::min);
            Ok(off_max <= on_min + tol)
        }
        SparsityTerm::Penalty(lambda) => {
            let cut = 2.0 * lambda / l;
            Ok((0..x.len()).all(|i| {
                if x[i] != 0.0 {
                    g[i].abs() <= tol && x[i] * x[i] >= cut - tol
                } else {
                    (g[i] / l).powi(2) <= cut + tol
                }
            }))
        }
    }
}

fn min_block_size(term: SparsityTerm) -> usize {
    match term {
        SparsityTerm::Cardinality(_) => 2,
        SparsityTerm::Penalty(_) => 1,
    }
}

/// First block whose exact re-optimization lowers `F` by more than
/// `tol · max(1, |F(x)|)`, if any.
pub fn find_block_violation(
    prob: &CompositeProblem,
    x: &Vector,
    k: usize,
    tol: f64,
    mode: BlockCheckMode,
) -> Result<Option<WorkingSet>> {
    let n = prob.n();
    check_len(n, x.len())?;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("block size {k} outside [1, {n}]")));
    }
    if k < min_block_size(prob.term) {
        return Err(Error::invalid(
            "block-1 stationarity is not defined under a cardinality constraint; use k >= 2",
        ));
    }
    let current = match prob.composite_value(x)? {
        Extended::Finite(v) => v,
        Extended::Infinite => return Ok(Some(WorkingSet::full(n))),
    };
    let state = PointState::new(prob, x)?;
    let threshold = current - tol * current.abs().max(1.0);
    let improves = |block: &WorkingSet| -> Result<bool> {
        let res = minimize_block(prob, x, &state, block, 0.0, SingularPolicy::Ridge)?;
        Ok(res.moved && res.objective < threshold)
    };
    match mode {
        BlockCheckMode::Exhaustive => {
            let work = binomial(n, k) * 2f64.powi(k as i32);
            if work > EXHAUSTIVE_BUDGET {
                return Err(Error::LandscapeTooLarge(format!(
                    "C({n},{k})·2^{k} = {work:.3e} exceeds {EXHAUSTIVE_BUDGET:.0e}"
                )));
            }
            for idx in Combinations::new(n, k) {
                let block = WorkingSet::new(idx, n)?;
                if improves(&block)? {
                    return Ok(Some(block));
                }
            }
        }
        BlockCheckMode::Sampled { trials, seed } => {
            let mut rng = seeded(seed);
            for _ in 0..trials {
                let block = random_set(n, k, &mut rng)?;
                if improves(&block)? {
                    return Ok(Some(block));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_block_k(
    prob: &CompositeProblem,
    x: &Vector,
    k: usize,
    tol: f64,
    mode: BlockCheckMode,
) -> Result<bool> {
    Ok(find_block_violation(prob, x, k, tol, mode)?.is_none())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicPoint {
    /// The support the point was solved on.
    pub support: Vec<usize>,
    pub point: Vector,
}

/// Restricted minimizers of `f`, one per admissible support (sizes `≤ s`
/// under a cardinality constraint, all `2^n` otherwise). Rank-deficient
/// supports use the minimum-norm solution.
///
/// Distinct supports can share a minimizer when a solved coordinate lands on
/// zero; [`distinct_points`] merges those.
pub fn enumerate_basic_points(prob: &CompositeProblem) -> Result<Vec<BasicPoint>> {
    let n = prob.n();
    let max_size = match prob.term {
        SparsityTerm::Cardinality(s) => s,
        SparsityTerm::Penalty(_) => n,
    };
    let count: f64 = (0..=max_size).map(|i| binomial(n, i)).sum();
    if count > ENUMERATION_BUDGET {
        return Err(Error::LandscapeTooLarge(format!(
            "{count:.3e} supports exceed {ENUMERATION_BUDGET:.0e}"
        )));
    }
    let zeros = Vector::zeros(n);
    let mut out = Vec::with_capacity(count as usize);
    for size in 0..=max_size {
        for supp in Combinations::new(n, size) {
            let mut point = Vector::zeros(n);
            if size > 0 {
                let z = restricted_minimize_with(
                    prob,
                    &supp,
                    &zeros,
                    &zeros,
                    0.0,
                    SingularPolicy::MinNorm,
                )?;
                for (r, &i) in supp.iter().enumerate() {
                    point[i] = z[r];
                }
            }
            out.push(BasicPoint {
                support: supp,
                point,
            });
        }
    }
    Ok(out)
}

/// Drops points whose coordinates all agree within `1e-8` with an earlier one.
pub fn distinct_points(points: &[BasicPoint]) -> Vec<BasicPoint> {
    let n = points.first().map_or(0, |p| p.point.len());
    let mut out: Vec<BasicPoint> = Vec::new();
    // Near-equal points share their thresholded support, so compare within buckets.
    let mut buckets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for bp in points {
        let key: Vec<usize> = (0..n).filter(|&i| bp.point[i].abs() > DEDUP_TOL).collect();
        let bucket = buckets.entry(key).or_default();
        if bucket
            .iter()
            .any(|&j| (&out[j].point - &bp.point).amax() <= DEDUP_TOL)
        {
            continue;
        }
        bucket.push(out.len());
        out.push(bp.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub point: Vector,
    pub objective: Extended,
    pub is_basic: bool,
    pub is_l_stationary: bool,
    pub block_k: BTreeMap<usize, bool>,
}

impl StationarityReport {
    /// Implications of the hierarchy that this report violates, as text.
    pub fn hierarchy_violations(&self, term: SparsityTerm) -> Vec<String> {
        let mut bad = Vec::new();
        if self.is_l_stationary && !self.is_basic {
            bad.push("L-stationary but not basic".to_string());
        }
        let first = min_block_size(term);
        let lowest_pass = match term {
            SparsityTerm::Cardinality(_) => self.block_k.get(&2),
            SparsityTerm::Penalty(_) => self.block_k.get(&1),
        };
        if lowest_pass == Some(&true) && !self.is_l_stationary {
            bad.push(format!("block-{first} but not L-stationary"));
        }
        for (&k, &pass) in &self.block_k {
            if pass {
                if let Some(false) = self.block_k.get(&(k - 1)) {
                    bad.push(format!("block-{k} but not block-{}", k - 1));
                }
            }
        }
        bad
    }
}

/// Evaluates every condition at `x`; block checks are exhaustive for
/// `k = k_min..=k_max`.
pub fn report(
    prob: &CompositeProblem,
    x: &Vector,
    l: f64,
    k_max: usize,
) -> Result<StationarityReport> {
    let mut block_k = BTreeMap::new();
    for k in min_block_size(prob.term)..=k_max.min(prob.n()) {
        block_k.insert(
            k,
            is_block_k(prob, x, k, BLOCK_TOL, BlockCheckMode::Exhaustive)?,
        );
    }
    Ok(StationarityReport {
        point: x.clone(),
        objective: prob.composite_value(x)?,
        is_basic: is_basic(prob, x, COORD_TOL)?,
        is_l_stationary: is_l_stationary(prob, x, l, COORD_TOL)?,
        block_k,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandscapeCounts {
    pub basic: usize,
    pub l_stat: usize,
    pub block_k: BTreeMap<usize, usize>,
}

/// Reports for every enumerated basic point, evaluated in parallel.
pub fn classify_basic_points(
    prob: &CompositeProblem,
    k_max: usize,
) -> Result<Vec<StationarityReport>> {
    let l = prob.objective.lipschitz_global();
    if !(l > 0.0) {
        return Err(Error::ZeroLipschitz);
    }
    let points = enumerate_basic_points(prob)?;
    points
        .par_iter()
        .map(|bp| report(prob, &bp.point, l, k_max))
        .collect()
}

/// Per-condition counts over all basic points, with `L = λ_max(Q)`.
pub fn landscape_table(prob: &CompositeProblem, k_max: usize) -> Result<LandscapeCounts> {
    let reports = classify_basic_points(prob, k_max)?;
    Ok(counts_of(&reports))
}

pub fn counts_of(reports: &[StationarityReport]) -> LandscapeCounts {
    let mut block_k = BTreeMap::new();
    for r in reports {
        for (&k, &pass) in &r.block_k {
            *block_k.entry(k).or_insert(0) += pass as usize;
        }
    }
    LandscapeCounts {
        basic: reports.iter().filter(|r| r.is_basic).count(),
        l_stat: reports.iter().filter(|r| r.is_l_stationary).count(),
        block_k,
    }
}

/// Nonzero count helper re-exported for report consumers.
pub fn point_nnz(x: &Vector) -> usize {
    nnz(x.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{running_example, QuadraticObjective};
    use crate::Matrix;

    fn cons() -> CompositeProblem {
        CompositeProblem::new(running_example(), SparsityTerm::Cardinality(4)).unwrap()
    }

    fn regu() -> CompositeProblem {
        CompositeProblem::new(running_example(), SparsityTerm::Penalty(0.01)).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_basic_points(&cons()).unwrap().len(), 57);
        assert_eq!(enumerate_basic_points(&regu()).unwrap().len(), 64);
        // Supports {0,1} and {0,2,3,4} solve to points with an exact zero
        // (c_i·Σc = 1 + Σc²), duplicating {0} and {0,2,4}.
        assert_eq!(
            distinct_points(&enumerate_basic_points(&cons()).unwrap()).len(),
            55
        );
        assert_eq!(
            distinct_points(&enumerate_basic_points(&regu()).unwrap()).len(),
            62
        );
        let one = QuadraticObjective::gram(
            Matrix::from_element(1, 1, 2.0),
            Vector::from_element(1, -1.0),
        )
        .unwrap();
        let prob = CompositeProblem::new(one, SparsityTerm::Penalty(0.1)).unwrap();
        let pts = enumerate_basic_points(&prob).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].point[0], 0.0);
        assert!((pts[1].point[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn basic_fails_after_perturbation() {
        let prob = cons();
        for bp in enumerate_basic_points(&prob)
            .unwrap()
            .iter()
            .filter(|b| !b.support.is_empty())
        {
            assert!(is_basic(&prob, &bp.point, COORD_TOL).unwrap());
            let mut y = bp.point.clone();
            y[bp.support[0]] += 1e-3;
            assert!(!is_basic(&prob, &y, COORD_TOL).unwrap());
        }
    }

    #[test]
    fn l_stationary_at_zero_penalty() {
        // x = 0: true iff g_i² ≤ 2λL with g = p = 1.
        let l = 92.0;
        for &(lam, expect) in &[(0.01, true), (0.005, false), (1.0 / 184.0, true)] {
            let prob =
                CompositeProblem::new(running_example(), SparsityTerm::Penalty(lam)).unwrap();
            assert_eq!(
                is_l_stationary(&prob, &Vector::zeros(6), l, 0.0).unwrap(),
                expect,
                "λ={lam}"
            );
        }
        assert!(is_l_stationary(&regu(), &Vector::zeros(6), 0.0, 1e-8).is_err());
    }

    #[test]
    fn cardinality_block_one_refused() {
        let err = is_block_k(
            &cons(),
            &Vector::zeros(6),
            1,
            BLOCK_TOL,
            BlockCheckMode::Exhaustive,
        );
        assert!(err.is_err());
    }

    #[test]
    fn exhaustive_budget_enforced() {
        let n = 40;
        let obj = QuadraticObjective::gram(Matrix::identity(n, n), Vector::zeros(n)).unwrap();
        let prob = CompositeProblem::new(obj, SparsityTerm::Penalty(1.0)).unwrap();
        let err = is_block_k(
            &prob,
            &Vector::zeros(n),
            12,
            BLOCK_TOL,
            BlockCheckMode::Exhaustive,
        );
        assert!(matches!(err, Err(Error::LandscapeTooLarge(_))));
    }

    #[test]
    fn cardinality_landscape() {
        let counts = landscape_table(&cons(), 6).unwrap();
        assert_eq!(counts.basic, 57);
        assert_eq!(counts.l_stat, 14);
        let blocks: Vec<_> = counts.block_k.into_iter().collect();
        assert_eq!(blocks, vec![(2, 2), (3, 1), (4, 1), (5, 1), (6, 1)]);
    }

    #[test]
    fn hierarchy_holds_on_running_example() {
        for prob in [cons(), regu()] {
            for r in classify_basic_points(&prob, 6).unwrap() {
                assert!(r.hierarchy_violations(prob.term).is_empty());
            }
        }
    }
}
