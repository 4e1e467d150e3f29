//! CSV writers for traces, per-run results, and per-cell summaries.
//!
//! Floats use Rust's shortest round-trip formatting. Time columns are written
//! as 0 unless wall-clock output is requested, so repeated runs are
//! byte-identical by default.

use std::fmt::Write as _;

use crate::dec::SolveTrace;
use crate::stationarity::LandscapeCounts;

pub const TRACE_HEADER: &str = "iter,objective,step_norm,working_set,elapsed_s";
pub const RESULTS_HEADER: &str = "instance,solver,mode,param,seed,final_objective,nnz,iters,wall_s";
pub const SUMMARY_HEADER: &str = "instance,solver,mode,param,runs,mean_objective,median_objective";

/// Iteration 0 holds the initial objective.
pub fn trace_csv(trace: &SolveTrace, wall_clock: bool) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let _ = writeln!(out, "0,{},0,,0", trace.initial_objective);
    for r in &trace.records {
        let ws = r.working_set.as_ref().map_or(String::new(), |w| {
            w.indices()
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(";")
        });
        let elapsed = if wall_clock { r.elapsed } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter, r.objective, r.step_norm, ws, elapsed
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub solver: String,
    pub mode: String,
    pub param: f64,
    pub seed: u64,
    pub final_objective: f64,
    pub nnz: usize,
    pub iters: usize,
    pub wall_s: f64,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.solver,
            self.mode,
            self.param,
            self.seed,
            self.final_objective,
            self.nnz,
            self.iters,
            self.wall_s
        )
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Groups rows by (instance, solver, mode, param) in first-seen order.
pub fn summary_csv(rows: &[ResultRow]) -> String {
    let mut groups: Vec<(&ResultRow, Vec<f64>)> = Vec::new();
    for r in rows {
        let key = |g: &ResultRow| {
            g.instance == r.instance
                && g.solver == r.solver
                && g.mode == r.mode
                && g.param == r.param
        };
        match groups.iter_mut().find(|(g, _)| key(g)) {
            Some((_, vals)) => vals.push(r.final_objective),
            None => groups.push((r, vec![r.final_objective])),
        }
    }
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (g, vals) in groups {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            g.instance,
            g.solver,
            g.mode,
            g.param,
            vals.len(),
            mean,
            median(&vals)
        );
    }
    out
}

/// `h,basic,l_stat,block_1,…,block_{k_max}` plus one row; block sizes that
/// were not evaluated print as `--`.
pub fn landscape_csv(label: &str, counts: &LandscapeCounts, k_max: usize) -> String {
    let mut out = String::from("h,basic,l_stat");
    for k in 1..=k_max {
        let _ = write!(out, ",block_{k}");
    }
    let _ = write!(out, "\n{label},{},{}", counts.basic, counts.l_stat);
    for k in 1..=k_max {
        match counts.block_k.get(&k) {
            Some(c) => {
                let _ = write!(out, ",{c}");
            }
            None => out.push_str(",--"),
        }
    }
    out.push('\n');
    out
}
