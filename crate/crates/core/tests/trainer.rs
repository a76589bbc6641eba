//! Centralized descent on random instances.

mod common;

use common::*;
use mspmf::{train_centralized, Hyperparams, Termination};
use proptest::prelude::*;

fn small() -> InstanceShape {
    InstanceShape {
        users: 8,
        items: 7,
        user_sources: 1,
        item_sources: 1,
        max_attributes: 4,
        k: 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn small_steps_never_increase_loss(seed in 0u64..1000, alpha in 1e-5f64..1e-3) {
        let p = random_problem(seed, &small());
        let h = Hyperparams { alpha, max_iters: 50, epsilon: 0.0, ..random_hyper(seed, 3, 1, 1) };
        let (_, trace) = train_centralized(&p, &h).unwrap();
        prop_assert_eq!(trace.records.len(), 50);
        let mut prev = trace.initial_loss;
        for r in &trace.records {
            prop_assert!(r.loss <= prev, "iteration {}: {} > {}", r.iteration, r.loss, prev);
            prev = r.loss;
        }
    }

    #[test]
    fn identical_inputs_identical_runs(seed in 0u64..1000) {
        let p = random_problem(seed, &small());
        let h = random_hyper(seed, 3, 1, 1);
        let a = train_centralized(&p, &h).unwrap();
        let b = train_centralized(&p, &h).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn huge_learning_rate_diverges() {
    for seed in 0..5 {
        let p = random_problem(seed, &small());
        let h = Hyperparams { alpha: 1e3, ..random_hyper(seed, 3, 1, 1) };
        let (_, trace) = train_centralized(&p, &h).unwrap();
        assert_eq!(trace.termination, Termination::Diverged, "seed {seed}");
        assert!(!trace.final_loss().is_finite());
    }
}
