//! RMSE per training-count bucket, with and without sources, next to the
//! user-mean and item-mean baselines.
//!
//!     cargo run --release --example cold_start_buckets

use mspmf::eval::synth::{generate, SynthConfig};
use mspmf::eval::{evaluate, SplitSpec, TrainMode};
use mspmf::{Hyperparams, Problem};

fn main() -> mspmf::Result<()> {
    let data = generate(&SynthConfig {
        users: 300,
        items: 150,
        density: 0.05,
        activity_spread: 1.2,
        user_sources: 2,
        item_sources: 1,
        attributes_per_source: 40,
        source_density: 0.2,
        seed: 3,
        ..SynthConfig::default()
    })?;
    let spec = SplitSpec::default();
    let hyper = Hyperparams {
        k: 5,
        max_iters: 1500,
        ..Hyperparams::default()
    };
    let bare = evaluate(&Problem::without_sources(data.ratings.clone()), &spec, &hyper, TrainMode::Central)?;
    let full = evaluate(&Problem::new(data.ratings, data.sources)?, &spec, &hyper, TrainMode::Central)?;

    println!("overall RMSE: ratings only {:.4}, with sources {:.4}", bare.mean_rmse, full.mean_rmse);
    println!("baselines: user mean {:.4}, item mean {:.4}\n", full.mean_user_mean_rmse, full.mean_item_mean_rmse);
    println!("{:<10}{:>8}{:>14}{:>14}", "bucket", "count", "no sources", "sources");
    let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    for (a, b) in bare.user_buckets.buckets.iter().zip(&full.user_buckets.buckets) {
        println!("{:<10}{:>8}{:>14}{:>14}", a.label, a.count, fmt(a.rmse), fmt(b.rmse));
    }
    Ok(())
}
