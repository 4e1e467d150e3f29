//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// What to do when a symmetric system fails to factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    /// Report [`Error::DegenerateSystem`].
    Fail,
    /// Add a ridge of `1e-12 · trace / dim`, then fall back to a
    /// pseudo-inverse if the ridged matrix still does not factor.
    Ridge,
    /// Fall back to the minimum-norm (pseudo-inverse) solution.
    MinNorm,
}

/// Solves `m · z = rhs` for symmetric positive (semi)definite `m`.
pub fn solve_spd(m: Matrix, rhs: &Vector, policy: SingularPolicy) -> Result<Vector> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Vector::zeros(0));
    }
    let fallback = match policy {
        SingularPolicy::Ridge | SingularPolicy::MinNorm => Some(m.clone()),
        SingularPolicy::Fail => None,
    };
    if let Some(chol) = Cholesky::new(m) {
        return Ok(chol.solve(rhs));
    }
    let Some(mut m) = fallback else {
        return Err(Error::DegenerateSystem);
    };
    let ridge = 1e-12 * m.trace() / dim as f64;
    if policy == SingularPolicy::Ridge && ridge > 0.0 {
        let ridged = &m + Matrix::identity(dim, dim) * ridge;
        if let Some(chol) = Cholesky::new(ridged) {
            return Ok(chol.solve(rhs));
        }
    }
    m.fill_lower_triangle_with_upper_triangle();
    Ok(pinv_solve(m, rhs))
}

/// Minimum-norm solution of `m · z = rhs` through the SVD.
pub fn pinv_solve(m: Matrix, rhs: &Vector) -> Vector {
    let svd = m.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-12 * svd.singular_values.len().max(1) as f64;
    svd.solve(rhs, eps).expect("svd computed with both factors")
}

/// Minimum-norm least squares `argmin ‖a z − b‖²`.
pub fn lstsq_min_norm(a: &Matrix, b: &Vector) -> Vector {
    if a.ncols() == 0 {
        return Vector::zeros(0);
    }
    pinv_solve(a.clone(), b)
}

/// Largest eigenvalue of a symmetric matrix by full decomposition.
pub fn max_eigenvalue_dense(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Power iteration for the top eigenvalue of a PSD operator.
pub fn power_iteration(
    apply: impl Fn(&Vector) -> Vector,
    start: Vector,
    max_iters: usize,
    tol: f64,
) -> f64 {
    let norm = start.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut v = start / norm;
    let mut estimate = 0.0;
    for _ in 0..max_iters {
        let w = apply(&v);
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return next;
        }
        estimate = next;
    }
    // Rayleigh quotient of the final iterate.
    v.dot(&apply(&v))
}
