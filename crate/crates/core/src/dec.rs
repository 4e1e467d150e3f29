//! The block decomposition loop.
//!
//! Each iteration selects a working set (random and/or greedy coordinates),
//! solves the proximal block subproblem exactly, and records the step. The
//! run stops once the windowed mean of relative objective drops falls to
//! `epsilon`, or after `max_iters` iterations.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::linalg::SingularPolicy;
use crate::problem::{CompositeProblem, SparsityTerm};
use crate::prox::hard_threshold_topk;
use crate::rng::{normal_vec, seeded};
use crate::subproblem::{minimize_block, PointState, WorkingSet};
use crate::working_set::{select_working_set_with_gradient, Combinations};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct DecConfig {
    pub n_random: usize,
    pub n_greedy: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub window: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for DecConfig {
    fn default() -> Self {
        Self {
            n_random: 2,
            n_greedy: 2,
            theta: 1e-3,
            epsilon: 1e-5,
            window: 50,
            max_iters: 1000,
            seed: 0,
        }
    }
}

impl DecConfig {
    pub fn new(n_random: usize, n_greedy: usize) -> Self {
        Self {
            n_random,
            n_greedy,
            ..Self::default()
        }
    }

    pub fn block_size(&self) -> usize {
        self.n_random + self.n_greedy
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let k = self.block_size();
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "working set size {k} outside [1, {n}]"
            )));
        }
        if !(self.theta > 0.0) {
            return Err(Error::invalid("theta must be positive"));
        }
        if !(self.epsilon >= 0.0) || self.window == 0 {
            return Err(Error::invalid(
                "stopping rule needs epsilon >= 0 and window >= 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    /// `F` after this iteration.
    pub objective: f64,
    /// `‖x^{t+1} − x^t‖₂`.
    pub step_norm: f64,
    pub working_set: Option<WorkingSet>,
    /// Seconds since the run started.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub initial_objective: f64,
    pub records: Vec<IterRecord>,
    pub status: Status,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// `F(x⁰), F(x¹), …`.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.records.iter().map(|r| r.objective))
            .collect()
    }

    pub fn final_objective(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    /// Iterations violating `F(x^{t+1}) + θ/2‖Δx‖² ≤ F(x^t) + tol`.
    pub fn sufficient_decrease_violations(&self, theta: f64, tol: f64) -> Vec<usize> {
        let mut prev = self.initial_objective;
        let mut bad = Vec::new();
        for r in &self.records {
            if r.objective + 0.5 * theta * r.step_norm * r.step_norm > prev + tol {
                bad.push(r.iter);
            }
            prev = r.objective;
        }
        bad
    }
}

/// `(F_t − F_{t+1}) / |F_t|`, taken as 0 when `F_t = 0`.
pub fn relative_drop(prev: f64, next: f64) -> f64 {
    if prev == 0.0 {
        0.0
    } else {
        (prev - next) / prev.abs()
    }
}

/// True iff the mean of the last `min(t, window)` drops is `≤ epsilon`.
pub fn stopping_rule(relative_drops: &[f64], window: usize, epsilon: f64) -> bool {
    let t = relative_drops.len();
    if t == 0 {
        return false;
    }
    let w = t.min(window.max(1));
    let tail = &relative_drops[t - w..];
    tail.iter().sum::<f64>() / w as f64 <= epsilon
}

/// Loop-level stop test: [`stopping_rule`] is consulted only once `window`
/// drops exist. Without this, a first block that cannot move (common from a
/// saturated 1e-7 start) gives `r₁ = 0` and ends the run at `t = 1`.
pub fn should_stop(relative_drops: &[f64], window: usize, epsilon: f64) -> bool {
    relative_drops.len() >= window && stopping_rule(relative_drops, window, epsilon)
}

/// `1e-7 · randn(n)`, projected onto `‖x‖₀ ≤ s` under a cardinality term.
pub fn init_solution(n: usize, term: SparsityTerm, seed: u64) -> Vector {
    let x = Vector::from_vec(normal_vec(&mut seeded(seed), n)) * 1e-7;
    match term {
        SparsityTerm::Cardinality(s) => hard_threshold_topk(&x, s.min(n)).expect("s clamped to n"),
        SparsityTerm::Penalty(_) => x,
    }
}

pub fn run_dec(
    prob: &CompositeProblem,
    x0: &Vector,
    config: &DecConfig,
) -> Result<(Vector, SolveTrace)> {
    let n = prob.n();
    check_len(n, x0.len())?;
    config.validate(n)?;
    if !prob.is_feasible(x0) {
        return Err(Error::Infeasible(
            "initial point violates the sparsity constraint".into(),
        ));
    }
    let start = Instant::now();
    let mut rng = seeded(config.seed);
    let mut x = x0.clone();
    let initial_objective = prob.composite_value(&x)?.finite();
    let mut objective = initial_objective;
    let mut drops = Vec::new();
    let mut records = Vec::new();
    let mut status = Status::MaxIters;

    for iter in 1..=config.max_iters {
        let state = PointState::new(prob, &x)?;
        let block = select_working_set_with_gradient(
            prob,
            &x,
            &state.gradient,
            config.n_random,
            config.n_greedy,
            &mut rng,
        )?;
        let res = minimize_block(prob, &x, &state, &block, config.theta, SingularPolicy::Fail)?;
        let (next_objective, step_norm) = if res.moved {
            (objective + res.delta, (&res.x_next - &x).norm())
        } else {
            (objective, 0.0)
        };
        drops.push(relative_drop(objective, next_objective));
        records.push(IterRecord {
            iter,
            objective: next_objective,
            step_norm,
            working_set: Some(block),
            elapsed: start.elapsed().as_secs_f64(),
        });
        x = res.x_next;
        objective = next_objective;
        if should_stop(&drops, config.window, config.epsilon) {
            status = Status::Converged;
            break;
        }
    }
    Ok((
        x,
        SolveTrace {
            initial_objective,
            records,
            status,
        },
    ))
}

/// Cycles through every `k`-subset in lexicographic order, solving each block
/// subproblem (`theta` may be 0), until one full pass changes nothing. A move
/// is accepted only if it lowers `F` by more than `tol · max(1, |F|)`.
///
/// Returns the final point and the number of passes made.
pub fn block_sweep(
    prob: &CompositeProblem,
    x0: &Vector,
    k: usize,
    theta: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(Vector, usize)> {
    let n = prob.n();
    check_len(n, x0.len())?;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("block size {k} outside [1, {n}]")));
    }
    let mut x = x0.clone();
    for sweep in 1..=max_sweeps {
        let mut changed = false;
        for idx in Combinations::new(n, k) {
            let block = WorkingSet::new(idx, n)?;
            let state = PointState::new(prob, &x)?;
            let res = minimize_block(prob, &x, &state, &block, theta, SingularPolicy::Ridge)?;
            let current = prob.composite_value(&x)?.finite();
            if res.moved && res.delta < -tol * current.abs().max(1.0) {
                x = res.x_next;
                changed = true;
            }
        }
        if !changed {
            return Ok((x, sweep));
        }
    }
    Ok((x, max_sweeps))
}
