//! Instance generation, file formats, solver dispatch, and the benchmark
//! runner behind the command-line tool.

pub mod bench;
pub mod formats;
pub mod generate;
pub mod output;
pub mod solver;

pub use bench::{run_benchmark, BenchConfig};
pub use formats::{load_instance, load_sparse_text, SparseLoadOptions};
pub use generate::{corrupt, gen_random, generate, GeneratedInstance, InstanceKind, InstanceSpec};
pub use output::{landscape_csv, ResultRow, RESULTS_HEADER, TRACE_HEADER};
pub use solver::{run_solver, Mode, SolveOutcome, SolveSettings, SolverKind};
