mod support;

use blockdec::prox::{half_threshold, hard_threshold_topk, prox_l0_penalty, soft_threshold};
use blockdec::Vector;
use support::{grid_min, Mix};

const DRAWS: usize = 300;

fn scalar(op: impl Fn(&Vector) -> Vector, a: f64) -> f64 {
    op(&Vector::from_element(1, a))[0]
}

fn bracket(a: f64) -> (f64, f64) {
    (a.min(0.0) - 1.0, a.max(0.0) + 1.0)
}

/// Worst excess of the operator's objective over the grid minimum.
fn worst_excess(seed: u64, mut case: impl FnMut(&mut Mix) -> (f64, f64)) -> f64 {
    let mut mix = Mix(seed);
    (0..DRAWS)
        .map(|_| case(&mut mix))
        .map(|(got, oracle)| got - oracle)
        .fold(f64::MIN, f64::max)
}

#[test]
fn soft_threshold_is_grid_optimal() {
    let worst = worst_excess(1, |mix| {
        let (a, t) = (mix.uniform(-5.0, 5.0), mix.uniform(0.0, 2.0));
        let phi = |z: f64| 0.5 * (z - a).powi(2) + t * z.abs();
        let (lo, hi) = bracket(a);
        (
            phi(scalar(|v| soft_threshold(v, t), a)),
            grid_min(phi, lo, hi, &[0.0, a]),
        )
    });
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn l0_prox_is_grid_optimal() {
    let worst = worst_excess(2, |mix| {
        let (a, step, lambda) = (
            mix.uniform(-4.0, 4.0),
            mix.uniform(0.1, 1.0),
            mix.uniform(0.0, 3.0),
        );
        let phi = |z: f64| 0.5 * (z - a).powi(2) + if z != 0.0 { lambda * step } else { 0.0 };
        let (lo, hi) = bracket(a);
        (
            phi(scalar(|v| prox_l0_penalty(v, step, lambda), a)),
            grid_min(phi, lo, hi, &[0.0, a]),
        )
    });
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn half_threshold_is_grid_optimal() {
    let worst = worst_excess(3, |mix| {
        let (a, t) = (mix.uniform(-5.0, 5.0), mix.uniform(0.01, 2.0));
        let phi = |z: f64| 0.5 * (z - a).powi(2) + t * z.abs().sqrt();
        let (lo, hi) = bracket(a);
        (
            phi(scalar(|v| half_threshold(v, t), a)),
            grid_min(phi, lo, hi, &[0.0]),
        )
    });
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn hard_threshold_matches_subset_search() {
    let mut mix = Mix(4);
    for _ in 0..200 {
        let n = 1 + mix.below(7);
        let s = mix.below(n + 1);
        let a = mix.vector(n);
        let got = hard_threshold_topk(&a, s).unwrap();
        // best kept set maximizes the retained energy
        let best_kept = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize <= s)
            .map(|m| {
                (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| a[i] * a[i])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let kept: f64 = got.iter().map(|v| v * v).sum();
        assert!((kept - best_kept).abs() <= 1e-12 * best_kept.max(1.0));
        assert!(got.iter().filter(|v| **v != 0.0).count() <= s);
        assert!(got.iter().zip(a.iter()).all(|(g, x)| *g == 0.0 || g == x));
    }
}
