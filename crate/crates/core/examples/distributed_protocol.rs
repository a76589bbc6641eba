//! Run the master/slave simulation, watch the first rounds of messages, and
//! confirm the result matches centralized training.
//!
//!     cargo run --release --example distributed_protocol

use mspmf::distributed::{run_distributed_with, GradientMessage, Observer, Schedule};
use mspmf::eval::synth::{generate, SynthConfig};
use mspmf::{train_centralized, Hyperparams, Problem};

struct Tap;

impl Observer for Tap {
    fn on_messages(&mut self, round: usize, messages: &[GradientMessage]) {
        if round > 2 {
            return;
        }
        for m in messages {
            let what = match m.vectors() {
                Some(v) => format!("{} vectors", v.n_cols()),
                None => "scalar".to_string(),
            };
            println!(
                "round {round}  {:<8} {:<14} {:<11} {:>6} B",
                m.link.to_string(),
                m.direction.as_str(),
                what,
                m.byte_size()
            );
        }
    }
}

fn main() -> mspmf::Result<()> {
    let data = generate(&SynthConfig {
        users: 60,
        items: 40,
        density: 0.15,
        user_sources: 2,
        item_sources: 1,
        source_only_entities: 5,
        seed: 2,
        ..SynthConfig::default()
    })?;
    let problem = Problem::new(data.ratings, data.sources)?;
    let hyper = Hyperparams {
        k: 4,
        max_iters: 200,
        ..Hyperparams::default()
    };

    let run = run_distributed_with(&problem, &hyper, Schedule::Threaded, &mut Tap)?;
    let (central, central_trace) = train_centralized(&problem, &hyper)?;

    println!("\nrounds {}, messages {}, bytes {}", run.trace.records.len() + 1, run.ledger.message_count(), run.ledger.total());
    for d in ["latent_down", "partial_up", "local_loss_up"] {
        let bytes: u64 = run.ledger.rows().filter(|r| r.direction.as_str() == d).map(|r| r.bytes).sum();
        println!("  {d:<14} {bytes:>9} B");
    }
    println!(
        "final loss distributed {:.10} central {:.10}",
        run.trace.final_loss(),
        central_trace.final_loss()
    );
    println!("max |factor difference| {:e}", central.max_abs_diff(&run.state));
    Ok(())
}
