//! Closed-form thresholding operators and the proximal-gradient step.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::problem::{nnz, Extended, QuadraticObjective, SparsityTerm};
use crate::Vector;

/// Nonsmooth terms a proximal-gradient step can handle: the two ℓ₀ forms
/// plus the ℓ₁ and ℓ_{1/2} relaxations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    Cardinality(usize),
    L0(f64),
    L1(f64),
    HalfPower(f64),
}

impl From<SparsityTerm> for Regularizer {
    fn from(term: SparsityTerm) -> Self {
        match term {
            SparsityTerm::Cardinality(s) => Regularizer::Cardinality(s),
            SparsityTerm::Penalty(l) => Regularizer::L0(l),
        }
    }
}

impl Regularizer {
    pub fn value(&self, x: &Vector) -> Extended {
        match *self {
            Regularizer::Cardinality(s) => {
                SparsityTerm::Cardinality(s).value_at_nnz(nnz(x.as_slice()))
            }
            Regularizer::L0(l) => Extended::Finite(l * nnz(x.as_slice()) as f64),
            Regularizer::L1(l) => Extended::Finite(l * x.lp_norm(1)),
            Regularizer::HalfPower(l) => {
                Extended::Finite(l * x.iter().map(|v| v.abs().sqrt()).sum::<f64>())
            }
        }
    }

    /// `argmin_z ½‖z − a‖² + step · h(z)`.
    pub fn prox(&self, a: &Vector, step: f64) -> Result<Vector> {
        match *self {
            Regularizer::Cardinality(s) => hard_threshold_topk(a, s),
            Regularizer::L0(l) => Ok(prox_l0_penalty(a, step, l)),
            Regularizer::L1(l) => Ok(soft_threshold(a, step * l)),
            Regularizer::HalfPower(l) => Ok(half_threshold(a, step * l)),
        }
    }
}

/// Keeps the `s` largest-magnitude entries of `a` and zeroes the rest.
/// Equal magnitudes favor the lower index.
pub fn hard_threshold_topk(a: &Vector, s: usize) -> Result<Vector> {
    let n = a.len();
    if s > n {
        return Err(Error::invalid(format!("cannot keep {s} of {n} entries")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j].abs().total_cmp(&a[i].abs()).then(i.cmp(&j)));
    let mut out = Vector::zeros(n);
    for &i in &order[..s] {
        out[i] = a[i];
    }
    Ok(out)
}

/// Proximal map of `step · λ‖·‖₀`: keeps `a_i` when `a_i² > 2λ·step`.
/// The tie `a_i² = 2λ·step` resolves to zero.
pub fn prox_l0_penalty(a: &Vector, step: f64, lambda: f64) -> Vector {
    let cut = 2.0 * lambda * step;
    a.map(|v| if v * v > cut { v } else { 0.0 })
}

pub fn soft_threshold(a: &Vector, t: f64) -> Vector {
    a.map(|v| v.signum() * (v.abs() - t).max(0.0))
}

/// Magnitude at or below which the ℓ_{1/2} proximal map returns zero:
/// `(3/2)·t^{2/3}` for `½(x − a)² + t|x|^{1/2}`.
pub fn half_threshold_cutoff(t: f64) -> f64 {
    1.5 * t.powf(2.0 / 3.0)
}

/// Exact minimizer of `½(x − a_i)² + t|x|^{1/2}` per coordinate.
///
/// Above the cutoff the nonzero stationary point is the largest root of a
/// depressed cubic in `√|x|`, written in trigonometric form:
/// `x = (2/3)·a·(1 + cos(2π/3 − (2/3)·φ))` with
/// `φ = arccos((t/4)·(|a|/3)^{−3/2})`.
pub fn half_threshold(a: &Vector, t: f64) -> Vector {
    let cut = half_threshold_cutoff(t);
    a.map(|v| {
        let mag = v.abs();
        if mag <= cut {
            return 0.0;
        }
        let arg = (t / 4.0) * (mag / 3.0).powf(-1.5);
        let phi = arg.clamp(-1.0, 1.0).acos();
        (2.0 / 3.0) * v * (1.0 + (2.0 * PI / 3.0 - 2.0 * phi / 3.0).cos())
    })
}

/// One forward–backward step `prox(x − β∇f(x); β, h)`.
pub fn proximal_step(
    objective: &QuadraticObjective,
    reg: Regularizer,
    x: &Vector,
    beta: f64,
) -> Result<Vector> {
    if !(beta > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let g = objective.gradient(x)?;
    let a = x - g * beta;
    reg.prox(&a, beta)
}
