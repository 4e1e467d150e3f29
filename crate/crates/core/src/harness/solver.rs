//! Name-based solver dispatch shared by the CLI and the benchmark runner.

use std::fmt;

use crate::baselines::{apgm, cvx_l1_sweep, default_lambda_grid, omp, pgm, StopRule};
use crate::dec::{init_solution, run_dec, DecConfig, SolveTrace};
use crate::error::{Error, Result};
use crate::problem::{nnz, CompositeProblem, QuadraticObjective, SparsityTerm};
use crate::prox::Regularizer;
use crate::Vector;

pub const VALID_SOLVERS: &str = "dec, dec-r<k>g<k>, pgm, apgm, omp, cvx-l1, pgm-l1, pgm-lhalf";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `‖x‖₀ ≤ s`.
    Cons,
    /// `λ‖x‖₀`.
    Regu,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cons" => Ok(Mode::Cons),
            "regu" => Ok(Mode::Regu),
            _ => Err(Error::invalid(format!(
                "mode must be cons or regu, got `{s}`"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Cons => "cons",
            Mode::Regu => "regu",
        }
    }

    /// `param` is `s` for `Cons` (a nonnegative integer) and `λ` for `Regu`.
    pub fn term(self, param: f64) -> Result<SparsityTerm> {
        match self {
            Mode::Cons if param >= 0.0 && param.fract() == 0.0 && param.is_finite() => {
                Ok(SparsityTerm::Cardinality(param as usize))
            }
            Mode::Cons => Err(Error::invalid(format!(
                "sparsity level must be a nonnegative integer, got {param}"
            ))),
            Mode::Regu => Ok(SparsityTerm::Penalty(param)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Dec { n_random: usize, n_greedy: usize },
    Pgm,
    Apgm,
    Omp,
    CvxL1,
    PgmL1,
    PgmLHalf,
}

impl SolverKind {
    /// `dec` alone is `dec-r2g2`.
    pub fn parse(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownSolver {
            name: name.to_string(),
            valid: VALID_SOLVERS.to_string(),
        };
        Ok(match name {
            "dec" => SolverKind::Dec {
                n_random: 2,
                n_greedy: 2,
            },
            "pgm" => SolverKind::Pgm,
            "apgm" => SolverKind::Apgm,
            "omp" => SolverKind::Omp,
            "cvx-l1" => SolverKind::CvxL1,
            "pgm-l1" => SolverKind::PgmL1,
            "pgm-lhalf" => SolverKind::PgmLHalf,
            _ => {
                let rest = name.strip_prefix("dec-r").ok_or_else(unknown)?;
                let (r, g) = rest.split_once('g').ok_or_else(unknown)?;
                SolverKind::Dec {
                    n_random: r.parse().map_err(|_| unknown())?,
                    n_greedy: g.parse().map_err(|_| unknown())?,
                }
            }
        })
    }

    fn regularizer(self, term: SparsityTerm) -> Regularizer {
        match (self, term) {
            (SolverKind::PgmL1, SparsityTerm::Penalty(l)) => Regularizer::L1(l),
            (SolverKind::PgmLHalf, SparsityTerm::Penalty(l)) => Regularizer::HalfPower(l),
            _ => term.into(),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverKind::Dec { n_random, n_greedy } => write!(f, "dec-r{n_random}g{n_greedy}"),
            SolverKind::Pgm => f.write_str("pgm"),
            SolverKind::Apgm => f.write_str("apgm"),
            SolverKind::Omp => f.write_str("omp"),
            SolverKind::CvxL1 => f.write_str("cvx-l1"),
            SolverKind::PgmL1 => f.write_str("pgm-l1"),
            SolverKind::PgmLHalf => f.write_str("pgm-lhalf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub theta: f64,
    pub stop: StopRule,
}

impl Default for SolveSettings {
    fn default() -> Self {
        let d = DecConfig::default();
        Self {
            theta: d.theta,
            stop: StopRule {
                max_iters: d.max_iters,
                window: d.window,
                epsilon: d.epsilon,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vector,
    /// `f + h` under the ℓ₀ term of the mode, recomputed from `x`.
    pub final_objective: f64,
    pub trace: Option<SolveTrace>,
    /// Iterations for iterative solvers, rounds for OMP, λ values for cvx-l1.
    pub iters: usize,
}

/// Runs one solver. Iterative solvers start from `init_solution(n, term, seed)`;
/// DEC also draws its working sets from `seed`. `omp` and `cvx-l1` need
/// `Cons` mode and a factored objective; `pgm-l1`/`pgm-lhalf` need `Regu`.
pub fn run_solver(
    kind: SolverKind,
    objective: &QuadraticObjective,
    mode: Mode,
    param: f64,
    seed: u64,
    settings: &SolveSettings,
) -> Result<SolveOutcome> {
    let term = mode.term(param)?;
    let prob = CompositeProblem::new(objective.clone(), term)?;
    let n = prob.n();
    let x0 = init_solution(n, term, seed);
    let needs = |wanted: Mode| -> Result<()> {
        if mode == wanted {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "solver {kind} requires --mode {}",
                wanted.label()
            )))
        }
    };
    let (x, trace, iters) = match kind {
        SolverKind::Dec { n_random, n_greedy } => {
            let config = DecConfig {
                n_random,
                n_greedy,
                theta: settings.theta,
                epsilon: settings.stop.epsilon,
                window: settings.stop.window,
                max_iters: settings.stop.max_iters,
                seed,
            };
            let (x, trace) = run_dec(&prob, &x0, &config)?;
            let it = trace.iterations();
            (x, Some(trace), it)
        }
        SolverKind::Pgm | SolverKind::Apgm | SolverKind::PgmL1 | SolverKind::PgmLHalf => {
            if matches!(kind, SolverKind::PgmL1 | SolverKind::PgmLHalf) {
                needs(Mode::Regu)?;
            }
            let reg = kind.regularizer(term);
            let run = if kind == SolverKind::Apgm { apgm } else { pgm };
            let r = run(objective, reg, &x0, settings.stop)?;
            let it = r.trace.iterations();
            (r.x, Some(r.trace), it)
        }
        SolverKind::Omp | SolverKind::CvxL1 => {
            needs(Mode::Cons)?;
            let SparsityTerm::Cardinality(s) = term else {
                unreachable!("cons mode")
            };
            let (a, b) = objective
                .factors()
                .ok_or_else(|| Error::invalid(format!("solver {kind} needs a data matrix")))?;
            if kind == SolverKind::Omp {
                (omp(a, b, s)?, None, s)
            } else {
                let grid = default_lambda_grid();
                (
                    cvx_l1_sweep(a, b, s, &grid, &x0, settings.stop)?,
                    None,
                    grid.len(),
                )
            }
        }
    };
    let final_objective = prob.composite_value(&x)?.finite();
    Ok(SolveOutcome {
        x,
        final_objective,
        trace,
        iters,
    })
}

pub fn outcome_nnz(o: &SolveOutcome) -> usize {
    nnz(o.x.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    #[test]
    fn names_round_trip() {
        for name in [
            "dec-r2g2",
            "dec-r4g2",
            "dec-r0g6",
            "pgm",
            "apgm",
            "omp",
            "cvx-l1",
            "pgm-l1",
            "pgm-lhalf",
        ] {
            assert_eq!(SolverKind::parse(name).unwrap().to_string(), name);
        }
        assert_eq!(SolverKind::parse("dec").unwrap().to_string(), "dec-r2g2");
        for bad in ["iht", "dec-r", "dec-rxg2", "dec-r2", ""] {
            match SolverKind::parse(bad) {
                Err(Error::UnknownSolver { valid, .. }) => assert!(valid.contains("cvx-l1")),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn mode_terms() {
        assert_eq!(Mode::Cons.term(3.0).unwrap(), SparsityTerm::Cardinality(3));
        assert!(Mode::Cons.term(2.5).is_err());
        assert_eq!(Mode::Regu.term(0.5).unwrap(), SparsityTerm::Penalty(0.5));
        assert!(Mode::parse("both").is_err());
    }

    #[test]
    fn dispatch_and_mode_checks() {
        let a = Matrix::from_fn(8, 12, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * j as f64
        });
        let b = Vector::from_fn(8, |i, _| i as f64 - 3.0);
        let obj = QuadraticObjective::factored(a, b).unwrap();
        let st = SolveSettings {
            stop: StopRule {
                max_iters: 30,
                ..StopRule::default()
            },
            ..Default::default()
        };
        for name in ["dec", "pgm", "apgm", "omp", "cvx-l1"] {
            let o = run_solver(
                SolverKind::parse(name).unwrap(),
                &obj,
                Mode::Cons,
                3.0,
                1,
                &st,
            )
            .unwrap();
            assert!(outcome_nnz(&o) <= 3, "{name}");
        }
        for name in ["dec", "pgm", "apgm", "pgm-l1", "pgm-lhalf"] {
            run_solver(
                SolverKind::parse(name).unwrap(),
                &obj,
                Mode::Regu,
                0.1,
                1,
                &st,
            )
            .unwrap();
        }
        assert!(run_solver(SolverKind::Omp, &obj, Mode::Regu, 0.1, 1, &st).is_err());
        assert!(run_solver(SolverKind::PgmL1, &obj, Mode::Cons, 3.0, 1, &st).is_err());
    }
}
