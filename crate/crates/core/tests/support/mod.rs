//! Independent oracles shared by the integration and acceptance tests. None
//! of these call into the solver code paths they are used to check.
#![allow(dead_code)]

use blockdec::{Matrix, Vector};
use nalgebra::SVD;

/// Minimum of a scalar function by grid search: a 1e-4 pass over `[lo, hi]`,
/// then a 1e-6 pass around the three best coarse cells, plus the `extra`
/// candidates evaluated exactly.
pub fn grid_min(phi: impl Fn(f64) -> f64, lo: f64, hi: f64, extra: &[f64]) -> f64 {
    const COARSE: f64 = 1e-4;
    const FINE: f64 = 1e-6;
    let steps = ((hi - lo) / COARSE).ceil() as usize;
    let mut coarse: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let z = (lo + i as f64 * COARSE).min(hi);
            (phi(z), z)
        })
        .collect();
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = extra.iter().map(|&z| phi(z)).fold(f64::INFINITY, f64::min);
    for &(v, z) in coarse.iter().take(3) {
        best = best.min(v);
        let fine = (2.0 * COARSE / FINE) as i64;
        for j in -fine..=fine {
            best = best.min(phi(z + j as f64 * FINE));
        }
    }
    best
}

/// Least-squares solution of `m z = r` by SVD (minimum norm when singular).
pub fn svd_solve(m: &Matrix, r: &Vector) -> Vector {
    if m.nrows() == 0 {
        return Vector::zeros(0);
    }
    let svd = SVD::new(m.clone(), true, true);
    let tol = svd.singular_values.max() * 1e-13 * m.nrows().max(m.ncols()) as f64;
    svd.solve(r, tol).expect("u and v were computed")
}

/// `½xᵀQx + pᵀx`.
pub fn quad_value(q: &Matrix, p: &Vector, x: &Vector) -> f64 {
    0.5 * x.dot(&(q * x)) + p.dot(x)
}

pub fn count_nnz(x: &Vector) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    Card(usize),
    Pen(f64),
}

pub fn term_value(term: Term, x: &Vector) -> f64 {
    match term {
        Term::Card(s) if count_nnz(x) <= s => 0.0,
        Term::Card(_) => f64::INFINITY,
        Term::Pen(l) => l * count_nnz(x) as f64,
    }
}

/// All subsets of `0..n` as bitmasks, filtered by size.
fn masks(n: usize, max_size: usize) -> impl Iterator<Item = u64> {
    (0u64..1 << n).filter(move |m| m.count_ones() as usize <= max_size)
}

fn indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Global minimum of `½xᵀQx + pᵀx + h(x)` over all supports, each solved by SVD.
pub fn brute_force_global(q: &Matrix, p: &Vector, term: Term) -> (f64, Vector) {
    let n = p.len();
    let cap = match term {
        Term::Card(s) => s,
        Term::Pen(_) => n,
    };
    let mut best = (f64::INFINITY, Vector::zeros(n));
    for mask in masks(n, cap) {
        let s = indices(mask, n);
        let qs = q.select_rows(&s).select_columns(&s);
        let ps = Vector::from_iterator(s.len(), s.iter().map(|&i| -p[i]));
        let z = svd_solve(&qs, &ps);
        let mut x = Vector::zeros(n);
        for (k, &i) in s.iter().enumerate() {
            x[i] = z[k];
        }
        let v = quad_value(q, p, &x) + term_value(term, &x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// Minimum over `z` with `z_i = x_i` off `block` of
/// `½zᵀQz + pᵀz + h(z) + θ/2‖z − x‖²`, by enumerating every subset of the block.
pub fn brute_force_block(
    q: &Matrix,
    p: &Vector,
    term: Term,
    x: &Vector,
    block: &[usize],
    theta: f64,
) -> f64 {
    let n = p.len();
    let k = block.len();
    let fixed: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
    let mut best = f64::INFINITY;
    for mask in 0u64..1 << k {
        let s: Vec<usize> = indices(mask, k).into_iter().map(|j| block[j]).collect();
        // stationarity in z_S: (Q_SS + θI) z_S = θ x_S − p_S − Q_{S,F} x_F
        let mut m = q.select_rows(&s).select_columns(&s);
        for d in 0..s.len() {
            m[(d, d)] += theta;
        }
        let r = Vector::from_iterator(
            s.len(),
            s.iter().map(|&i| {
                theta * x[i] - p[i] - fixed.iter().map(|&j| q[(i, j)] * x[j]).sum::<f64>()
            }),
        );
        let zs = svd_solve(&m, &r);
        let mut z = x.clone();
        for &i in block {
            z[i] = 0.0;
        }
        for (d, &i) in s.iter().enumerate() {
            z[i] = zs[d];
        }
        let h = term_value(term, &z);
        if h.is_infinite() {
            continue;
        }
        let v = quad_value(q, p, &z) + h + 0.5 * theta * (&z - x).norm_squared();
        best = best.min(v);
    }
    best
}

/// `Q = AᵀA`, `p = −Aᵀb`, `c = ½‖b‖²`.
pub fn gram_of(a: &Matrix, b: &Vector) -> (Matrix, Vector, f64) {
    (
        a.transpose() * a,
        -(a.transpose() * b),
        0.5 * b.norm_squared(),
    )
}

/// Splitmix64, so oracle inputs do not share a generator with the library.
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Approximate normal (sum of 12 uniforms − 6).
    pub fn normalish(&mut self) -> f64 {
        (0..12).map(|_| self.uniform(0.0, 1.0)).sum::<f64>() - 6.0
    }

    pub fn matrix(&mut self, m: usize, n: usize) -> Matrix {
        Matrix::from_fn(m, n, |_, _| self.normalish())
    }

    pub fn vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.normalish())
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
