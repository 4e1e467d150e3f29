//! Block decomposition for sparse quadratic optimization.
//!
//! Minimizes `F(x) = f(x) + h(x)` where `f` is a convex quadratic (either
//! `½xᵀQx + pᵀx` or `½‖Ax − b‖²`) and `h` is either the indicator of
//! `‖x‖₀ ≤ s` or the penalty `λ‖x‖₀`.
//!
//! The main solver ([`dec::run_dec`]) repeatedly picks a small working set of
//! coordinates and solves the restricted problem over that set *exactly* by
//! enumerating every zero/nonzero pattern ([`subproblem::solve_block`]). A
//! proximal term `θ/2‖z − xᵗ‖²` keeps each step a sufficient decrease.
//!
//! Alongside the solver the crate ships:
//! - thresholding operators and gradient-type baselines (IHT, accelerated IHT,
//!   OMP, an ℓ₁ sweep) in [`prox`] and [`baselines`];
//! - checkers for basic, L- and block-k stationarity plus a landscape counter
//!   in [`stationarity`];
//! - data generators, file formats and a benchmark runner in [`harness`].

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod dec;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod stationarity;
pub mod subproblem;
pub mod working_set;

pub use error::{Error, ErrorKind, Result};
pub use problem::{CompositeProblem, Extended, QuadraticObjective, SparsityTerm};
pub use subproblem::WorkingSet;

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
