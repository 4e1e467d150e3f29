//! Reference solvers: proximal gradient (IHT for ℓ₀ terms), its accelerated
//! variant, orthogonal matching pursuit, and the ℓ₁-relaxation sweep.

use std::time::Instant;

use crate::dec::{relative_drop, should_stop, IterRecord, SolveTrace, Status};
use crate::error::{check_len, Error, Result};
use crate::linalg::lstsq_min_norm;
use crate::problem::{support, Extended, QuadraticObjective};
use crate::prox::{hard_threshold_topk, proximal_step, Regularizer};
use crate::{Matrix, Vector};

/// Iteration cap plus the windowed relative-drop rule shared with DEC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iters: usize,
    pub window: usize,
    pub epsilon: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            window: 50,
            epsilon: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub x: Vector,
    /// Objective trace of the problem actually iterated (relaxed for ℓ₁/ℓ_{1/2}).
    pub trace: SolveTrace,
    /// Final `f + h_relaxed` for the ℓ₁ and ℓ_{1/2} relaxations.
    pub relaxed_objective: Option<f64>,
}

fn objective_of(obj: &QuadraticObjective, reg: Regularizer, x: &Vector) -> Result<f64> {
    let f = obj.value(x)?;
    match reg.value(x) {
        Extended::Finite(h) => Ok(f + h),
        Extended::Infinite => Err(Error::Infeasible(
            "iterate violates the sparsity constraint".into(),
        )),
    }
}

fn step_size(obj: &QuadraticObjective) -> Result<f64> {
    let l = obj.lipschitz_global();
    if !(l > 0.0) {
        return Err(Error::ZeroLipschitz);
    }
    Ok(1.0 / l)
}

fn relaxed(reg: Regularizer, value: f64) -> Option<f64> {
    matches!(reg, Regularizer::L1(_) | Regularizer::HalfPower(_)).then_some(value)
}

/// Proximal gradient with `β = 1/L`.
pub fn pgm(
    obj: &QuadraticObjective,
    reg: Regularizer,
    x0: &Vector,
    stop: StopRule,
) -> Result<BaselineResult> {
    iterate(obj, reg, x0, stop, false)
}

/// Accelerated proximal gradient: the step is taken from
/// `y = xᵗ + ωₜ(xᵗ − xᵗ⁻¹)` with the standard momentum sequence. No restart,
/// so the objective need not decrease monotonically.
pub fn apgm(
    obj: &QuadraticObjective,
    reg: Regularizer,
    x0: &Vector,
    stop: StopRule,
) -> Result<BaselineResult> {
    iterate(obj, reg, x0, stop, true)
}

/// `(τₜ, ωₜ)` for `t = 1..=count`, with `τ₀ = 1`.
pub fn momentum_sequence(count: usize) -> Vec<(f64, f64)> {
    let mut tau = 1.0f64;
    (0..count)
        .map(|_| {
            let next = (1.0 + (1.0 + 4.0 * tau * tau).sqrt()) / 2.0;
            let omega = (tau - 1.0) / next;
            tau = next;
            (next, omega)
        })
        .collect()
}

fn iterate(
    obj: &QuadraticObjective,
    reg: Regularizer,
    x0: &Vector,
    stop: StopRule,
    accelerated: bool,
) -> Result<BaselineResult> {
    check_len(obj.n(), x0.len())?;
    let beta = step_size(obj)?;
    let start = Instant::now();
    let mut x = x0.clone();
    let mut x_prev = x0.clone();
    let mut tau = 1.0f64;
    let initial_objective = objective_of(obj, reg, &x)?;
    let mut current = initial_objective;
    let mut drops = Vec::new();
    let mut records = Vec::new();
    let mut status = Status::MaxIters;
    for iter in 1..=stop.max_iters {
        let base = if accelerated {
            let next_tau = (1.0 + (1.0 + 4.0 * tau * tau).sqrt()) / 2.0;
            let omega = (tau - 1.0) / next_tau;
            tau = next_tau;
            &x + (&x - &x_prev) * omega
        } else {
            x.clone()
        };
        let next = proximal_step(obj, reg, &base, beta)?;
        let value = objective_of(obj, reg, &next)?;
        drops.push(relative_drop(current, value));
        records.push(IterRecord {
            iter,
            objective: value,
            step_norm: (&next - &x).norm(),
            working_set: None,
            elapsed: start.elapsed().as_secs_f64(),
        });
        x_prev = std::mem::replace(&mut x, next);
        current = value;
        if should_stop(&drops, stop.window, stop.epsilon) {
            status = Status::Converged;
            break;
        }
    }
    Ok(BaselineResult {
        x,
        trace: SolveTrace {
            initial_objective,
            records,
            status,
        },
        relaxed_objective: relaxed(reg, current),
    })
}

#[derive(Debug, Clone)]
pub struct OmpPath {
    pub x: Vector,
    /// Columns in the order they were selected.
    pub selected: Vec<usize>,
    /// `‖b − Ax‖` after each round (index 0 is `‖b‖`).
    pub residual_norms: Vec<f64>,
}

/// Orthogonal matching pursuit with `s` rounds.
pub fn omp(a: &Matrix, b: &Vector, s: usize) -> Result<Vector> {
    Ok(omp_path(a, b, s)?.x)
}

pub fn omp_path(a: &Matrix, b: &Vector, s: usize) -> Result<OmpPath> {
    let (m, n) = a.shape();
    check_len(m, b.len())?;
    if s > m.min(n) {
        return Err(Error::invalid(format!(
            "s = {s} exceeds min(m, n) = {}",
            m.min(n)
        )));
    }
    let mut selected: Vec<usize> = Vec::with_capacity(s);
    let mut x = Vector::zeros(n);
    let mut residual = b.clone();
    let mut residual_norms = vec![residual.norm()];
    for _ in 0..s {
        let corr = a.tr_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|j| !selected.contains(j)) {
            let c = corr[j].abs();
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((j, c));
            }
        }
        let Some((j, _)) = best else { break };
        selected.push(j);
        let mut cols = selected.clone();
        cols.sort_unstable();
        let coef = lstsq_min_norm(&a.select_columns(&cols), b);
        x.fill(0.0);
        for (r, &i) in cols.iter().enumerate() {
            x[i] = coef[r];
        }
        residual = b - a * &x;
        residual_norms.push(residual.norm());
    }
    Ok(OmpPath {
        x,
        selected,
        residual_norms,
    })
}

/// `λ ∈ {2⁻¹⁰, 2⁻⁸, …, 2¹⁰}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-10..=10).step_by(2).map(|e| 2f64.powi(e)).collect()
}

/// For each `λ`: solve the ℓ₁ relaxation by PGM from `x0`, keep the top `s`
/// entries, refit least squares on that support. Returns the refit with the
/// smallest `½‖Ax − b‖²` (earliest `λ` on ties).
pub fn cvx_l1_sweep(
    a: &Matrix,
    b: &Vector,
    s: usize,
    lambda_grid: &[f64],
    x0: &Vector,
    stop: StopRule,
) -> Result<Vector> {
    if lambda_grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    let obj = QuadraticObjective::factored(a.clone(), b.clone())?;
    check_len(obj.n(), x0.len())?;
    let mut best: Option<(f64, Vector)> = None;
    for &lambda in lambda_grid {
        let relaxed = pgm(&obj, Regularizer::L1(lambda), x0, stop)?;
        let candidate = refit_top_s(a, b, &relaxed.x, s)?;
        let value = obj.value(&candidate)?;
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, candidate));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}

/// Least-squares refit on the support of `Γ_s(x)`.
pub fn refit_top_s(a: &Matrix, b: &Vector, x: &Vector, s: usize) -> Result<Vector> {
    let n = a.ncols();
    let kept = hard_threshold_topk(x, s.min(n))?;
    let supp = support(kept.as_slice());
    let mut out = Vector::zeros(n);
    if supp.is_empty() {
        return Ok(out);
    }
    let coef = lstsq_min_norm(&a.select_columns(&supp), b);
    for (r, &i) in supp.iter().enumerate() {
        out[i] = coef[r];
    }
    Ok(out)
}
