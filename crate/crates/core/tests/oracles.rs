//! Loss and gradient checked against independent scalar-loop oracles.

mod common;

use common::*;
use mspmf::objective::{loss, ModelState};

fn shape(k: usize) -> InstanceShape {
    InstanceShape {
        users: 6,
        items: 5,
        user_sources: 2,
        item_sources: 1,
        max_attributes: 4,
        k,
    }
}

#[test]
fn loss_matches_brute_force() {
    for seed in 0..10 {
        let sh = shape(1 + (seed as usize % 4));
        let problem = random_problem(seed, &sh);
        let hyper = random_hyper(seed, sh.k, 2, 1);
        let mut state = ModelState::init(&problem, &hyper);
        randomize_state(&mut state, &problem, seed, 0.8);
        let lib = loss(&problem, &state, &hyper).unwrap();
        let oracle = brute_force_loss(&problem, &state, &hyper);
        assert!((lib.total - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{} vs {oracle}", lib.total);
        let parts = lib.rating_term
            + lib.user_source_terms.iter().sum::<f64>()
            + lib.item_source_terms.iter().sum::<f64>()
            + lib.regularization;
        assert!((parts - lib.total).abs() <= 1e-12 * lib.total.abs());
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 100..110 {
        let sh = shape(1 + (seed as usize % 4));
        let problem = random_problem(seed, &sh);
        let hyper = random_hyper(seed, sh.k, 2, 1);
        let mut state = ModelState::init(&problem, &hyper);
        randomize_state(&mut state, &problem, seed, 0.8);
        let (worst, n) = worst_gradient_error(&problem, &state, &hyper);
        assert!(worst <= 1e-5, "seed {seed}: worst relative error {worst:e} over {n} partials");
    }
}

use mspmf::dataset::{Problem, RatingDataset, SourceMatrix};
use mspmf::FactorMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn copy_by_label(dst: &mut FactorMatrix, src: &FactorMatrix) {
    for c in 0..dst.n_cols() {
        let id = dst.labels()[c].clone();
        dst.col_mut(c).copy_from_slice(src.col_of(&id).unwrap());
    }
}

/// The same data with every matrix's entries listed in a shuffled order,
/// which permutes the first-appearance label order.
fn shuffled(problem: &Problem, seed: u64) -> Problem {
    let mut rng = mspmf::rng::stream(seed, "test/shuffle");
    let mut reorder = |m: &mspmf::SparseMatrix| {
        let mut t: Vec<_> = m
            .entries()
            .iter()
            .map(|e| (m.row_labels()[e.row].key.clone(), m.col_labels()[e.col].key.clone(), e.value))
            .collect();
        t.shuffle(&mut rng);
        t
    };
    let r = mspmf::SparseMatrix::build(reorder(&problem.ratings.ratings), mspmf::Namespace::User, mspmf::Namespace::Item)
        .unwrap();
    let sources = problem
        .sources()
        .map(|s| SourceMatrix::from_triples(s.id, reorder(&s.matrix)).unwrap())
        .collect();
    let ratings = RatingDataset::new(r, problem.ratings.scale_lo, problem.ratings.scale_hi).unwrap();
    Problem::new(ratings, sources).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loss_ignores_entity_order(seed in 0u64..10_000) {
        let sh = shape(3);
        let p = random_problem(seed, &sh);
        let h = random_hyper(seed, 3, 2, 1);
        let mut a = ModelState::init(&p, &h);
        randomize_state(&mut a, &p, seed, 0.8);

        let q = shuffled(&p, seed);
        let mut b = ModelState::init(&q, &h);
        copy_by_label(&mut b.u, &a.u);
        copy_by_label(&mut b.v, &a.v);
        for (fb, fa) in b.sources_mut().zip(a.sources()) {
            copy_by_label(&mut fb.local, &fa.local);
            copy_by_label(&mut fb.z, &fa.z);
        }
        let la = loss(&p, &a, &h).unwrap().total;
        let lb = loss(&q, &b, &h).unwrap().total;
        prop_assert!((la - lb).abs() <= 1e-12 * la.abs());
    }
}
