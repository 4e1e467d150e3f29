mod support;

use blockdec::subproblem::solve_block;
use blockdec::{CompositeProblem, Matrix, QuadraticObjective, SparsityTerm, Vector, WorkingSet};
use proptest::prelude::*;
use support::{brute_force_block, gram_of, Mix, Term};

struct Case {
    prob: CompositeProblem,
    q: Matrix,
    p: Vector,
    offset: f64,
    term: Term,
}

fn case(mix: &mut Mix, n: usize, factored: bool, penalty: bool) -> Case {
    let m = 2 + mix.below(n + 2);
    let a = mix.matrix(m, n);
    let b = mix.vector(m);
    let (q, p, offset) = gram_of(&a, &b);
    let (term, lib_term) = if penalty {
        let l = mix.uniform(0.01, 2.0);
        (Term::Pen(l), SparsityTerm::Penalty(l))
    } else {
        let s = 1 + mix.below(n);
        (Term::Card(s), SparsityTerm::Cardinality(s))
    };
    let objective = if factored {
        QuadraticObjective::factored(a, b).unwrap()
    } else {
        QuadraticObjective::gram(q.clone(), p.clone()).unwrap()
    };
    let offset = if factored { offset } else { 0.0 };
    Case {
        prob: CompositeProblem::new(objective, lib_term).unwrap(),
        q,
        p,
        offset,
        term,
    }
}

/// Random point with at most `cap` nonzeros.
fn sparse_point(mix: &mut Mix, n: usize, cap: usize) -> Vector {
    let mut x = Vector::zeros(n);
    for _ in 0..mix.below(cap + 1) {
        x[mix.below(n)] = mix.normalish();
    }
    x
}

fn random_block(mix: &mut Mix, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + mix.below(n - i);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

#[test]
fn block_solve_matches_pattern_enumeration() {
    let mut mix = Mix(11);
    for trial in 0..160 {
        let n = 2 + mix.below(11);
        let c = case(&mut mix, n, trial % 2 == 0, trial % 4 >= 2);
        let cap = match c.term {
            Term::Card(s) => s,
            Term::Pen(_) => n,
        };
        let x = sparse_point(&mut mix, n, cap);
        let k = 1 + mix.below(n.min(8));
        let block = random_block(&mut mix, n, k);
        let theta = [1e-3, 0.1, 1.0][trial % 3];
        let res = solve_block(
            &c.prob,
            &x,
            &WorkingSet::new(block.clone(), n).unwrap(),
            theta,
        )
        .unwrap();
        let oracle = brute_force_block(&c.q, &c.p, c.term, &x, &block, theta) + c.offset;
        let scale = oracle.abs().max(1.0);
        assert!(
            (res.objective - oracle).abs() <= 1e-9 * scale,
            "trial {trial}: solver {} vs oracle {oracle}",
            res.objective
        );
        for i in (0..n).filter(|i| !block.contains(i)) {
            assert_eq!(res.x_next[i], x[i]);
        }
    }
}

#[test]
fn full_block_on_twelve_coordinates() {
    let mut mix = Mix(12);
    for penalty in [false, true] {
        let c = case(&mut mix, 12, true, penalty);
        let x = Vector::zeros(12);
        let block: Vec<usize> = (0..12).collect();
        let res = solve_block(&c.prob, &x, &WorkingSet::full(12), 1e-3).unwrap();
        let oracle = brute_force_block(&c.q, &c.p, c.term, &x, &block, 1e-3) + c.offset;
        assert!((res.objective - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn block_step_is_a_sufficient_decrease(seed in any::<u64>(), penalty in any::<bool>(), theta in 1e-4f64..1.0) {
        let mut mix = Mix(seed);
        let n = 2 + mix.below(9);
        let c = case(&mut mix, n, true, penalty);
        let cap = match c.term { Term::Card(s) => s, Term::Pen(_) => n };
        let x = sparse_point(&mut mix, n, cap);
        let k = 1 + mix.below(n.min(6));
        let block = random_block(&mut mix, n, k);
        let res = solve_block(&c.prob, &x, &WorkingSet::new(block, n).unwrap(), theta).unwrap();
        let before = c.prob.composite_value(&x).unwrap().finite();
        let after = c.prob.composite_value(&res.x_next).unwrap().finite();
        let step = (&res.x_next - &x).norm_squared();
        prop_assert!(after + 0.5 * theta * step <= before + 1e-10 * before.abs().max(1.0));
        prop_assert!((res.delta - (after - before)).abs() <= 1e-9 * before.abs().max(1.0));
    }
}
