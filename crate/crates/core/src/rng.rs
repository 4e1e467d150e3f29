//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], a ChaCha8 stream
//! cipher generator keyed by a 64-bit seed. Gaussian variates use the
//! Box–Muller transform on two 53-bit uniforms (the cosine branch only), so a
//! seed maps to the same instance on every platform with IEEE-754 `ln`,
//! `sqrt` and `cos`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal variate (Box–Muller, cosine branch).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    // 1 - u keeps the log argument in (0, 1].
    let u1 = 1.0 - uniform01(rng);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn normal_vec<R: RngCore + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| standard_normal(rng)).collect()
}

/// `k` distinct indices from `0..n`, uniform over all `C(n, k)` subsets, in
/// draw order. Partial Fisher–Yates.
pub fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
