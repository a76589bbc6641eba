//! Test RMSE as sources are added one at a time (0 = ratings only).
//!
//!     cargo run --release --example source_sweep

use mspmf::eval::synth::{generate, SynthConfig};
use mspmf::eval::{source_sweep, SplitSpec, SweepMode, TrainMode};
use mspmf::Hyperparams;

fn main() -> mspmf::Result<()> {
    let data = generate(&SynthConfig {
        users: 150,
        items: 100,
        density: 0.08,
        user_sources: 2,
        item_sources: 2,
        attributes_per_source: 40,
        source_density: 0.2,
        ..SynthConfig::default()
    })?;
    let spec = SplitSpec::new(0.8, 3, 0)?;
    let hyper = Hyperparams {
        k: 5,
        max_iters: 1500,
        ..Hyperparams::default()
    };
    for mode in [SweepMode::UserOnly, SweepMode::ItemOnly, SweepMode::Both] {
        let table = source_sweep(&data.ratings, &data.sources, &spec, &hyper, mode, TrainMode::Central)?;
        println!("{mode:?}");
        print!("{}", table.to_tsv());
    }
    Ok(())
}
