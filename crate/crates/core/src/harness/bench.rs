//! TOML-configured benchmark: every (instance, solver, param, seed) cell is
//! run, then results, summaries, traces and solutions are written in cell
//! order by one writer.
//!
//! ```toml
//! solvers = ["dec-r4g2", "pgm"]
//! mode = "cons"            # or "regu"
//! params = [10, 20]        # s for cons, lambda for regu
//! seeds = [0, 1, 2, 3, 4]
//! wall_clock = false       # write measured times instead of 0
//!
//! [settings]               # all optional
//! theta = 1e-3
//! epsilon = 1e-5
//! window = 50
//! max_iters = 1000
//!
//! [[instance]]
//! name = "rc64"
//! kind = "random-corrupt"  # random | random-corrupt | file
//! m = 64
//! n = 256
//! support = 10
//! seed = 1
//! # noise = 10.0, corrupt_fraction = 0.02, corrupt_factor = 100.0
//! # file instances: path = "data.txt" (relative to the config),
//! # rows, cols, n_features, sample_seed
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use super::formats::{load_instance, write_points, SparseLoadOptions};
use super::generate::{generate, InstanceKind, InstanceSpec};
use super::output::{results_csv, summary_csv, trace_csv, ResultRow};
use super::solver::{outcome_nnz, run_solver, Mode, SolveSettings, SolverKind};
use crate::error::{Error, Result};
use crate::problem::QuadraticObjective;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn value(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SettingsConfig {
    theta: Option<f64>,
    epsilon: Option<f64>,
    window: Option<usize>,
    max_iters: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceConfig {
    name: String,
    kind: String,
    m: Option<usize>,
    n: Option<usize>,
    support: Option<usize>,
    noise: Option<f64>,
    corrupt_fraction: Option<f64>,
    corrupt_factor: Option<f64>,
    #[serde(default)]
    seed: u64,
    path: Option<PathBuf>,
    rows: Option<usize>,
    cols: Option<usize>,
    n_features: Option<usize>,
    #[serde(default)]
    sample_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    solvers: Vec<String>,
    mode: String,
    params: Vec<Number>,
    seeds: Vec<u64>,
    #[serde(default)]
    wall_clock: bool,
    #[serde(default)]
    settings: SettingsConfig,
    #[serde(rename = "instance")]
    instances: Vec<InstanceConfig>,
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub name: String,
    pub spec: InstanceSpec,
    pub sparse: SparseLoadOptions,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub instances: Vec<BenchInstance>,
    pub solvers: Vec<SolverKind>,
    pub mode: Mode,
    pub params: Vec<f64>,
    pub seeds: Vec<u64>,
    pub settings: SolveSettings,
    pub wall_clock: bool,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
}

impl BenchConfig {
    /// File paths in instances are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let solvers = raw
            .solvers
            .iter()
            .map(|s| SolverKind::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let mode = Mode::parse(&raw.mode)?;
        let params: Vec<f64> = raw.params.iter().map(|p| p.value()).collect();
        for &p in &params {
            mode.term(p)?;
        }
        if solvers.is_empty()
            || params.is_empty()
            || raw.seeds.is_empty()
            || raw.instances.is_empty()
        {
            return Err(Error::Config(
                "solvers, params, seeds and instances must be nonempty".into(),
            ));
        }
        let mut settings = SolveSettings::default();
        let s = &raw.settings;
        settings.theta = s.theta.unwrap_or(settings.theta);
        settings.stop.epsilon = s.epsilon.unwrap_or(settings.stop.epsilon);
        settings.stop.window = s.window.unwrap_or(settings.stop.window);
        settings.stop.max_iters = s.max_iters.unwrap_or(settings.stop.max_iters);

        let mut names = BTreeSet::new();
        let mut instances = Vec::new();
        for ic in raw.instances {
            if !valid_name(&ic.name) {
                return Err(Error::Config(format!(
                    "instance name `{}` must match [A-Za-z0-9._-]+",
                    ic.name
                )));
            }
            if !names.insert(ic.name.clone()) {
                return Err(Error::Config(format!(
                    "duplicate instance name `{}`",
                    ic.name
                )));
            }
            let kind = match ic.kind.as_str() {
                "random" => InstanceKind::RandomMN,
                "random-corrupt" => InstanceKind::RandomMNCorrupted,
                "file" => InstanceKind::LoadedFile,
                k => return Err(Error::Config(format!("unknown instance kind `{k}`"))),
            };
            let d = InstanceSpec::default();
            let spec = InstanceSpec {
                kind,
                m: ic.m.unwrap_or(d.m),
                n: ic.n.unwrap_or(d.n),
                true_support: ic.support.unwrap_or(d.true_support),
                noise_scale: ic.noise.unwrap_or(d.noise_scale),
                corrupt_fraction: ic.corrupt_fraction.unwrap_or(d.corrupt_fraction),
                corrupt_factor: ic.corrupt_factor.unwrap_or(d.corrupt_factor),
                seed: ic.seed,
                path: ic.path.map(|p| base_dir.join(p)),
            };
            spec.validate()?;
            let sparse = SparseLoadOptions {
                n_features: ic.n_features,
                rows: ic.rows,
                cols: ic.cols,
                seed: ic.sample_seed,
            };
            instances.push(BenchInstance {
                name: ic.name,
                spec,
                sparse,
            });
        }
        Ok(Self {
            instances,
            solvers,
            mode,
            params,
            seeds: raw.seeds,
            settings,
            wall_clock: raw.wall_clock,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn cell_count(&self) -> usize {
        self.instances.len() * self.solvers.len() * self.params.len() * self.seeds.len()
    }
}

impl BenchInstance {
    pub fn objective(&self) -> Result<QuadraticObjective> {
        let (a, b) = match self.spec.kind {
            InstanceKind::LoadedFile => {
                let path = self.spec.path.as_deref().expect("validated file instance");
                load_instance(path, &self.sparse)?
            }
            _ => {
                let g = generate(&self.spec)?;
                (g.a, g.b)
            }
        };
        QuadraticObjective::factored(a, b)
    }
}

#[derive(Debug, Clone)]
pub struct CellOutput {
    pub row: ResultRow,
    /// `<instance>__<solver>__<mode><param>__seed<seed>`.
    pub stem: String,
    pub trace_csv: Option<String>,
    pub solution: String,
}

/// Runs every cell in parallel; output order is instance, solver, param, seed.
pub fn run_cells(config: &BenchConfig) -> Result<Vec<CellOutput>> {
    let objectives = config
        .instances
        .par_iter()
        .map(BenchInstance::objective)
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::with_capacity(config.cell_count());
    for (ii, inst) in config.instances.iter().enumerate() {
        for &solver in &config.solvers {
            for &param in &config.params {
                for &seed in &config.seeds {
                    cells.push((ii, inst, solver, param, seed));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(ii, inst, solver, param, seed)| {
            let start = Instant::now();
            let out = run_solver(
                solver,
                &objectives[ii],
                config.mode,
                param,
                seed,
                &config.settings,
            )?;
            let wall = if config.wall_clock {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            let mode = config.mode.label();
            let row = ResultRow {
                instance: inst.name.clone(),
                solver: solver.to_string(),
                mode: mode.to_string(),
                param,
                seed,
                final_objective: out.final_objective,
                nnz: outcome_nnz(&out),
                iters: out.iters,
                wall_s: wall,
            };
            Ok(CellOutput {
                stem: format!("{}__{}__{mode}{param}__seed{seed}", inst.name, solver),
                trace_csv: out.trace.as_ref().map(|t| trace_csv(t, config.wall_clock)),
                solution: write_points(&out.x),
                row,
            })
        })
        .collect()
}

/// Writes `results.csv`, `summary.csv`, `traces/*.csv` and `solutions/*.txt`
/// under `out_dir`, returning the result rows.
pub fn run_benchmark(config: &BenchConfig, out_dir: &Path) -> Result<Vec<ResultRow>> {
    let cells = run_cells(config)?;
    let traces = out_dir.join("traces");
    let solutions = out_dir.join("solutions");
    fs::create_dir_all(&traces)?;
    fs::create_dir_all(&solutions)?;
    for c in &cells {
        if let Some(t) = &c.trace_csv {
            fs::write(traces.join(format!("{}.csv", c.stem)), t)?;
        }
        fs::write(solutions.join(format!("{}.txt", c.stem)), &c.solution)?;
    }
    let rows: Vec<ResultRow> = cells.into_iter().map(|c| c.row).collect();
    fs::write(out_dir.join("results.csv"), results_csv(&rows))?;
    fs::write(out_dir.join("summary.csv"), summary_csv(&rows))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
solvers = ["dec-r2g1", "pgm"]
mode = "cons"
params = [3]
seeds = [0, 1, 2, 3, 4]

[settings]
max_iters = 40

[[instance]]
name = "tiny"
kind = "random"
m = 6
n = 12
support = 3
seed = 9
"#;

    #[test]
    fn parses_and_counts_cells() {
        let c = BenchConfig::parse(BASIC, Path::new(".")).unwrap();
        assert_eq!(c.cell_count(), 10);
        assert_eq!(c.settings.stop.max_iters, 40);
        assert_eq!(c.params, vec![3.0]);
        assert_eq!(run_cells(&c).unwrap().len(), 10);
    }

    #[test]
    fn config_errors() {
        let bad_solver = BASIC.replace("\"pgm\"", "\"iht\"");
        assert!(matches!(
            BenchConfig::parse(&bad_solver, Path::new(".")),
            Err(Error::UnknownSolver { .. })
        ));
        let bad_key = BASIC.replace("seed = 9", "seed = 9\ncolour = 1");
        assert!(matches!(
            BenchConfig::parse(&bad_key, Path::new(".")),
            Err(Error::Config(_))
        ));
        let bad_s = BASIC.replace("params = [3]", "params = [2.5]");
        assert!(BenchConfig::parse(&bad_s, Path::new(".")).is_err());
        let bad_name = BASIC.replace("\"tiny\"", "\"a/b\"");
        assert!(matches!(
            BenchConfig::parse(&bad_name, Path::new(".")),
            Err(Error::Config(_))
        ));
    }
}
