//! Synthetic instances: Gaussian designs with a planted sparse signal, and
//! outlier corruption of a design matrix.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::rng::{normal_vec, sample_without_replacement, seeded, standard_normal};
use crate::{Matrix, Vector};

/// Mixed into an instance seed to get an independent stream for corruption.
const CORRUPT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    RandomMN,
    RandomMNCorrupted,
    LoadedFile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub m: usize,
    pub n: usize,
    pub true_support: usize,
    pub noise_scale: f64,
    pub corrupt_fraction: f64,
    pub corrupt_factor: f64,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            kind: InstanceKind::RandomMN,
            m: 64,
            n: 256,
            true_support: 10,
            noise_scale: 10.0,
            corrupt_fraction: 0.02,
            corrupt_factor: 100.0,
            seed: 0,
            path: None,
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.kind == InstanceKind::LoadedFile {
            return match self.path {
                Some(_) => Ok(()),
                None => Err(Error::invalid("file instance without a path")),
            };
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("m and n must be positive"));
        }
        if self.true_support == 0 || self.true_support > self.n {
            return Err(Error::invalid(format!(
                "true support {} outside 1..={}",
                self.true_support, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.corrupt_fraction) {
            return Err(Error::invalid("corrupt fraction must lie in [0, 1]"));
        }
        if !self.noise_scale.is_finite() || !self.corrupt_factor.is_finite() {
            return Err(Error::invalid(
                "noise scale and corrupt factor must be finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub a: Matrix,
    pub b: Vector,
    pub x_true: Vector,
}

/// Draw order from `seeded(spec.seed)`: A row by row, the support positions,
/// the signal values in ascending position order, then the noise vector.
pub fn gen_random(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    if spec.kind != InstanceKind::RandomMN {
        return Err(Error::invalid("gen_random needs a random instance spec"));
    }
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = seeded(spec.seed);
    let a = Matrix::from_row_slice(m, n, &normal_vec(&mut rng, m * n));
    let mut positions = sample_without_replacement(&mut rng, n, spec.true_support);
    positions.sort_unstable();
    let mut x_true = Vector::zeros(n);
    for &i in &positions {
        // a zero draw would shrink the support; it has probability zero but is cheap to rule out
        let mut v = standard_normal(&mut rng);
        while v == 0.0 {
            v = standard_normal(&mut rng);
        }
        x_true[i] = v;
    }
    let noise = Vector::from_vec(normal_vec(&mut rng, m));
    let b = &a * &x_true + noise * spec.noise_scale;
    Ok(GeneratedInstance { a, b, x_true })
}

/// Scales exactly `round(fraction · m · n)` distinct entries by `factor`.
/// Entries are addressed in column-major order.
pub fn corrupt(a: &Matrix, fraction: f64, factor: f64, seed: u64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid("corrupt fraction must lie in [0, 1]"));
    }
    let total = a.len();
    let count = ((fraction * total as f64).round() as usize).min(total);
    let mut out = a.clone();
    let mut rng = seeded(seed);
    for idx in sample_without_replacement(&mut rng, total, count) {
        out.as_mut_slice()[idx] *= factor;
    }
    Ok(out)
}

/// `RandomMN` or `RandomMNCorrupted`. For the corrupted kind, `b` is formed
/// from the clean design, then the design is corrupted.
pub fn generate(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    match spec.kind {
        InstanceKind::RandomMN => gen_random(spec),
        InstanceKind::RandomMNCorrupted => {
            let clean = InstanceSpec {
                kind: InstanceKind::RandomMN,
                ..spec.clone()
            };
            let mut inst = gen_random(&clean)?;
            inst.a = corrupt(
                &inst.a,
                spec.corrupt_fraction,
                spec.corrupt_factor,
                spec.seed ^ CORRUPT_SALT,
            )?;
            Ok(inst)
        }
        InstanceKind::LoadedFile => Err(Error::invalid("file instances are loaded, not generated")),
    }
}
