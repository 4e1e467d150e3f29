//! The smooth quadratic `f`, the sparsity term `h` and their sum `F`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::rng;
use crate::{Matrix, Vector};

/// Factored problems at or below this width cache `AᵀA` and `−Aᵀb`.
pub const GRAM_CACHE_MAX_N: usize = 4096;
/// Dimensions at or below this use a dense eigensolver for `L`.
const DENSE_EIG_MAX_N: usize = 64;
const POWER_ITERS: usize = 200;
const POWER_TOL: f64 = 1e-10;
const POWER_SEED: u64 = 0x5eed_1a7e;

#[derive(Debug, Clone)]
enum Form {
    Gram { q: Matrix, p: Vector },
    Factored { a: Matrix, b: Vector },
}

/// Convex quadratic `½xᵀQx + pᵀx` or `½‖Ax − b‖²`.
///
/// Immutable once built; the Gram cache and Lipschitz constant are filled
/// lazily behind `OnceLock`, so a shared reference is safe across threads.
#[derive(Debug)]
pub struct QuadraticObjective {
    form: Form,
    gram: OnceLock<(Matrix, Vector)>,
    lipschitz: OnceLock<f64>,
}

impl Clone for QuadraticObjective {
    fn clone(&self) -> Self {
        Self {
            form: self.form.clone(),
            gram: self.gram.clone(),
            lipschitz: self.lipschitz.clone(),
        }
    }
}

impl QuadraticObjective {
    pub fn gram(q: Matrix, p: Vector) -> Result<Self> {
        let n = p.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: q.nrows().max(q.ncols()),
            });
        }
        let scale = q.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            if q[(i, i)] < 0.0 {
                return Err(Error::invalid(format!("Q[{i},{i}] is negative")));
            }
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("Q is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self::from_form(Form::Gram { q, p }))
    }

    pub fn factored(a: Matrix, b: Vector) -> Result<Self> {
        check_len(a.nrows(), b.len())?;
        Ok(Self::from_form(Form::Factored { a, b }))
    }

    fn from_form(form: Form) -> Self {
        Self {
            form,
            gram: OnceLock::new(),
            lipschitz: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        match &self.form {
            Form::Gram { p, .. } => p.len(),
            Form::Factored { a, .. } => a.ncols(),
        }
    }

    /// `(A, b)` when built in factored form.
    pub fn factors(&self) -> Option<(&Matrix, &Vector)> {
        match &self.form {
            Form::Factored { a, b } => Some((a, b)),
            Form::Gram { .. } => None,
        }
    }

    /// The constant separating the two forms: `½‖b‖²` for factored, 0 otherwise.
    pub fn offset(&self) -> f64 {
        match &self.form {
            Form::Gram { .. } => 0.0,
            Form::Factored { b, .. } => 0.5 * b.norm_squared(),
        }
    }

    /// `(Q, p)`, built once for factored problems small enough to cache.
    pub fn cached_gram(&self) -> Option<(&Matrix, &Vector)> {
        match &self.form {
            Form::Gram { q, p } => Some((q, p)),
            Form::Factored { a, b } => {
                if a.ncols() > GRAM_CACHE_MAX_N {
                    return None;
                }
                let (q, p) = self.gram.get_or_init(|| {
                    let q = a.transpose() * a;
                    let p = -(a.transpose() * b);
                    (q, p)
                });
                Some((q, p))
            }
        }
    }

    /// Equivalent Gram-form objective (`f_gram = f − offset`).
    pub fn to_gram(&self) -> QuadraticObjective {
        match &self.form {
            Form::Gram { .. } => self.clone(),
            Form::Factored { a, b } => {
                let (q, p) = match self.cached_gram() {
                    Some((q, p)) => (q.clone(), p.clone()),
                    None => (a.transpose() * a, -(a.transpose() * b)),
                };
                Self::from_form(Form::Gram { q, p })
            }
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_len(self.n(), x.len())?;
        Ok(match &self.form {
            Form::Gram { q, p } => 0.5 * x.dot(&(q * x)) + p.dot(x),
            Form::Factored { a, b } => 0.5 * (a * x - b).norm_squared(),
        })
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        check_len(self.n(), x.len())?;
        Ok(match &self.form {
            Form::Gram { q, p } => q * x + p,
            Form::Factored { a, b } => a.tr_mul(&(a * x - b)),
        })
    }

    /// `Q_ij`.
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        match self.cached_gram() {
            Some((q, _)) => q[(i, j)],
            None => {
                let (a, _) = self.factors().expect("uncached form is factored");
                a.column(i).dot(&a.column(j))
            }
        }
    }

    /// `Q` restricted to rows and columns `idx`.
    pub fn gram_block(&self, idx: &[usize]) -> Matrix {
        let k = idx.len();
        match self.cached_gram() {
            Some((q, _)) => Matrix::from_fn(k, k, |r, c| q[(idx[r], idx[c])]),
            None => {
                let (a, _) = self.factors().expect("uncached form is factored");
                let cols = a.select_columns(idx);
                cols.tr_mul(&cols)
            }
        }
    }

    /// `(Q v)` restricted to rows `idx`.
    pub fn gram_rows_times(&self, idx: &[usize], v: &Vector) -> Vector {
        match self.cached_gram() {
            Some((q, _)) => Vector::from_fn(idx.len(), |r, _| q.row(idx[r]).transpose().dot(v)),
            None => {
                let (a, _) = self.factors().expect("uncached form is factored");
                let av = a * v;
                Vector::from_fn(idx.len(), |r, _| a.column(idx[r]).dot(&av))
            }
        }
    }

    /// `p_i` (equal to `−A_iᵀb` for factored problems).
    pub fn linear_entry(&self, i: usize) -> f64 {
        match &self.form {
            Form::Gram { p, .. } => p[i],
            Form::Factored { a, b } => match self.cached_gram() {
                Some((_, p)) => p[i],
                None => -a.column(i).dot(b),
            },
        }
    }

    /// `λ_max(Q)`: dense eigensolver for small `n`, power iteration otherwise.
    pub fn lipschitz_global(&self) -> f64 {
        *self.lipschitz.get_or_init(|| self.compute_lipschitz())
    }

    fn compute_lipschitz(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            return 0.0;
        }
        if n <= DENSE_EIG_MAX_N {
            let (q, _) = self.cached_gram().expect("small problems are cached");
            return linalg::max_eigenvalue_dense(q).max(0.0);
        }
        let start = Vector::from_vec(rng::normal_vec(&mut rng::seeded(POWER_SEED), n));
        match (self.cached_gram(), &self.form) {
            (Some((q, _)), _) => linalg::power_iteration(|v| q * v, start, POWER_ITERS, POWER_TOL),
            (None, Form::Factored { a, .. }) => {
                linalg::power_iteration(|v| a.tr_mul(&(a * v)), start, POWER_ITERS, POWER_TOL)
            }
            (None, Form::Gram { .. }) => unreachable!("gram form is always cached"),
        }
        .max(0.0)
    }

    /// `diag(Q)`, the per-coordinate curvature.
    pub fn coordinate_lipschitz(&self) -> Vector {
        let n = self.n();
        match self.cached_gram() {
            Some((q, _)) => q.diagonal(),
            None => {
                let (a, _) = self.factors().expect("uncached form is factored");
                Vector::from_fn(n, |i, _| a.column(i).norm_squared())
            }
        }
    }
}

/// The nonsmooth part `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsityTerm {
    /// Indicator of `‖x‖₀ ≤ s`.
    Cardinality(usize),
    /// `λ‖x‖₀`.
    Penalty(f64),
}

impl SparsityTerm {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            SparsityTerm::Cardinality(s) if s == 0 || s > n => Err(Error::invalid(format!(
                "sparsity level s = {s} outside [1, {n}]"
            ))),
            SparsityTerm::Penalty(l) if !(l > 0.0 && l.is_finite()) => Err(Error::invalid(
                format!("penalty lambda = {l} must be positive"),
            )),
            _ => Ok(()),
        }
    }

    /// `h(x)` for a point with `nnz` nonzeros.
    pub fn value_at_nnz(&self, nnz: usize) -> Extended {
        match *self {
            SparsityTerm::Cardinality(s) if nnz > s => Extended::Infinite,
            SparsityTerm::Cardinality(_) => Extended::Finite(0.0),
            SparsityTerm::Penalty(l) => Extended::Finite(l * nnz as f64),
        }
    }
}

/// Extended real with a single `+∞` element ordered above every finite value.
///
/// Arithmetic is only defined on the finite part; [`Extended::finite`] panics
/// on the sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    #[track_caller]
    pub fn finite(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::Infinite => panic!("arithmetic on the +inf sentinel"),
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// `F = f + h`.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub objective: QuadraticObjective,
    pub term: SparsityTerm,
}

impl CompositeProblem {
    pub fn new(objective: QuadraticObjective, term: SparsityTerm) -> Result<Self> {
        term.validate(objective.n())?;
        Ok(Self { objective, term })
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn composite_value(&self, x: &Vector) -> Result<Extended> {
        let f = self.objective.value(x)?;
        Ok(match self.term.value_at_nnz(nnz(x.as_slice())) {
            Extended::Finite(h) => Extended::Finite(f + h),
            Extended::Infinite => Extended::Infinite,
        })
    }

    pub fn is_feasible(&self, x: &Vector) -> bool {
        match self.term {
            SparsityTerm::Cardinality(s) => nnz(x.as_slice()) <= s,
            SparsityTerm::Penalty(_) => true,
        }
    }
}

/// Count of entries that are not exactly `0.0`.
pub fn nnz(x: &[f64]) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Indices of entries that are not exactly `0.0`, ascending.
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// The six-dimensional landscape instance: `Q = ccᵀ + I`, `p = 1`, `c = [1..6]`.
pub fn running_example() -> QuadraticObjective {
    let c = Vector::from_fn(6, |i, _| (i + 1) as f64);
    let q = &c * c.transpose() + Matrix::identity(6, 6);
    QuadraticObjective::gram(q, Vector::from_element(6, 1.0)).expect("valid by construction")
}
