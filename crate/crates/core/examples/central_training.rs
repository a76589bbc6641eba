//! Train the joint model with centralized gradient descent and predict a
//! few ratings.
//!
//!     cargo run --release --example central_training

use mspmf::eval::synth::{generate, SynthConfig};
use mspmf::{predict, train_centralized, EntityId, Hyperparams, Problem};

fn main() -> mspmf::Result<()> {
    let data = generate(&SynthConfig {
        users: 200,
        items: 120,
        density: 0.06,
        user_sources: 1,
        item_sources: 1,
        seed: 1,
        ..SynthConfig::default()
    })?;
    let scale = (data.ratings.scale_lo, data.ratings.scale_hi);
    let problem = Problem::new(data.ratings, data.sources)?;
    let hyper = Hyperparams {
        k: 5,
        max_iters: 2000,
        ..Hyperparams::default()
    };
    let (state, trace) = train_centralized(&problem, &hyper)?;
    println!(
        "{} after {} iterations: loss {:.4} -> {:.4}",
        trace.termination.as_str(),
        trace.records.len(),
        trace.initial_loss,
        trace.final_loss()
    );
    for r in trace.records.iter().step_by(trace.records.len().div_ceil(8).max(1)) {
        println!("  iter {:>5}  loss {:>12.4}  max step {:.2e}", r.iteration, r.loss, r.max_update);
    }

    for e in problem.ratings.ratings.entries().iter().take(5) {
        let user = &problem.ratings.users()[e.row];
        let item = &problem.ratings.items()[e.col];
        let p = predict(&state, user, item, scale)?;
        println!("{user} x {item}: observed {:+.3}, predicted {p:+.3}", e.value);
    }
    let unknown = predict(&state, &EntityId::user("nobody"), &EntityId::item("i0"), scale);
    println!("unknown user: {}", unknown.unwrap_err());
    Ok(())
}
