//! Working-set selection: uniform random blocks, greedy one-coordinate
//! scores, and the mixed random/greedy rule used by DEC.

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::problem::{CompositeProblem, SparsityTerm};
use crate::rng::sample_without_replacement;
use crate::subproblem::WorkingSet;
use crate::Vector;

/// Uniformly random `k`-subset of `0..n`.
pub fn random_set<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<WorkingSet> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("block size {k} outside [1, {n}]")));
    }
    WorkingSet::new(sample_without_replacement(rng, n, k), n)
}

/// One-coordinate change in `F` for every coordinate of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyScores {
    /// Zero coordinates: best decrease from activating the coordinate.
    pub activate: Vec<(usize, f64)>,
    /// Nonzero coordinates: exact change from setting the coordinate to zero.
    pub deactivate: Vec<(usize, f64)>,
}

impl GreedyScores {
    /// All scores indexed by coordinate.
    pub fn merged(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(i, s) in self.activate.iter().chain(&self.deactivate) {
            out[i] = s;
        }
        out
    }
}

pub fn greedy_scores(prob: &CompositeProblem, x: &Vector) -> Result<GreedyScores> {
    let g = prob.objective.gradient(x)?;
    greedy_scores_with_gradient(prob, x, &g)
}

/// Scores from a precomputed gradient. Under a cardinality constraint the
/// budget is ignored: scores rank candidates, the block solve enforces
/// feasibility.
pub fn greedy_scores_with_gradient(
    prob: &CompositeProblem,
    x: &Vector,
    g: &Vector,
) -> Result<GreedyScores> {
    let n = prob.n();
    check_len(n, x.len())?;
    check_len(n, g.len())?;
    let curv = prob.objective.coordinate_lipschitz();
    let lambda = match prob.term {
        SparsityTerm::Penalty(l) => l,
        SparsityTerm::Cardinality(_) => 0.0,
    };
    let mut activate = Vec::new();
    let mut deactivate = Vec::new();
    for i in 0..n {
        let (gi, qi, xi) = (g[i], curv[i], x[i]);
        if xi == 0.0 {
            let score = if qi == 0.0 {
                if gi == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                let drop = -gi * gi / (2.0 * qi);
                match prob.term {
                    SparsityTerm::Penalty(_) => (lambda + drop).min(0.0),
                    SparsityTerm::Cardinality(_) => drop,
                }
            };
            activate.push((i, score));
        } else {
            deactivate.push((i, -xi * gi + 0.5 * xi * xi * qi - lambda));
        }
    }
    Ok(GreedyScores {
        activate,
        deactivate,
    })
}

/// Picks the `n_greedy` lowest merged scores (ties to the lower index), then
/// `n_random` uniformly from what is left.
pub fn select_working_set<R: Rng + ?Sized>(
    prob: &CompositeProblem,
    x: &Vector,
    n_random: usize,
    n_greedy: usize,
    rng: &mut R,
) -> Result<WorkingSet> {
    let g = if n_greedy > 0 {
        prob.objective.gradient(x)?
    } else {
        Vector::zeros(0)
    };
    select_working_set_with_gradient(prob, x, &g, n_random, n_greedy, rng)
}

pub fn select_working_set_with_gradient<R: Rng + ?Sized>(
    prob: &CompositeProblem,
    x: &Vector,
    g: &Vector,
    n_random: usize,
    n_greedy: usize,
    rng: &mut R,
) -> Result<WorkingSet> {
    let n = prob.n();
    let k = n_random + n_greedy;
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "working set size {k} outside [1, {n}]"
        )));
    }
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    if n_greedy > 0 {
        let scores = greedy_scores_with_gradient(prob, x, g)?.merged(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]).then(i.cmp(&j)));
        for &i in &order[..n_greedy] {
            chosen.push(i);
            taken[i] = true;
        }
    }
    if n_random > 0 {
        let rest: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
        for pos in sample_without_replacement(rng, rest.len(), n_random) {
            chosen.push(rest[pos]);
        }
    }
    WorkingSet::new(chosen, n)
}

/// Lexicographic `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// `C(n, k)` as a float (exact for the sizes the enumerators accept).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::QuadraticObjective;
    use crate::rng::seeded;
    use crate::Matrix;

    fn diag_problem(term: SparsityTerm) -> CompositeProblem {
        let obj =
            QuadraticObjective::gram(Matrix::identity(2, 2), Vector::from_vec(vec![-3.0, -1.0]))
                .unwrap();
        CompositeProblem::new(obj, term).unwrap()
    }

    #[test]
    fn cardinality_activation_scores() {
        let prob = diag_problem(SparsityTerm::Cardinality(1));
        let s = greedy_scores(&prob, &Vector::zeros(2)).unwrap();
        assert_eq!(s.activate, vec![(0, -4.5), (1, -0.5)]);
        assert!(s.deactivate.is_empty());
    }

    #[test]
    fn huge_penalty_blocks_activation() {
        let prob = diag_problem(SparsityTerm::Penalty(1e6));
        let s = greedy_scores(&prob, &Vector::zeros(2)).unwrap();
        assert!(s.activate.iter().all(|&(_, c)| c == 0.0));
    }

    #[test]
    fn zero_curvature_scores() {
        let obj = QuadraticObjective::gram(Matrix::zeros(2, 2), Vector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        let prob = CompositeProblem::new(obj, SparsityTerm::Penalty(0.1)).unwrap();
        let s = greedy_scores(&prob, &Vector::zeros(2)).unwrap();
        assert_eq!(s.activate, vec![(0, f64::NEG_INFINITY), (1, 0.0)]);
    }

    #[test]
    fn greedy_pick_and_full_set() {
        let prob = diag_problem(SparsityTerm::Cardinality(1));
        let mut rng = seeded(0);
        let ws = select_working_set(&prob, &Vector::zeros(2), 0, 1, &mut rng).unwrap();
        assert_eq!(ws.indices(), &[0]);
        let ws = select_working_set(&prob, &Vector::zeros(2), 0, 2, &mut rng).unwrap();
        assert_eq!(ws.indices(), &[0, 1]);
        assert!(select_working_set(&prob, &Vector::zeros(2), 2, 1, &mut rng).is_err());
        assert!(select_working_set(&prob, &Vector::zeros(2), 0, 0, &mut rng).is_err());
    }

    #[test]
    fn pure_random_matches_random_set() {
        let prob = diag_problem(SparsityTerm::Cardinality(1));
        let a = select_working_set(&prob, &Vector::zeros(2), 1, 0, &mut seeded(5)).unwrap();
        let b = random_set(2, 1, &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn combinations_enumerate_everything() {
        let all: Vec<_> = Combinations::new(5, 3).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert_eq!(Combinations::new(4, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(6, 7), 0.0);
    }

    #[test]
    fn random_set_edges() {
        let mut rng = seeded(1);
        assert_eq!(random_set(6, 6, &mut rng).unwrap(), WorkingSet::full(6));
        assert!(random_set(6, 0, &mut rng).is_err());
        assert!(random_set(6, 7, &mut rng).is_err());
        assert_eq!(
            random_set(9, 3, &mut seeded(42)).unwrap(),
            random_set(9, 3, &mut seeded(42)).unwrap()
        );
    }
}
