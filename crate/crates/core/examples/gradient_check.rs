//! Evaluate the joint loss term by term and compare analytic partials with
//! central finite differences.
//!
//!     cargo run --example gradient_check

use mspmf::eval::synth::{generate, SynthConfig};
use mspmf::objective::ModelState;
use mspmf::{grad, loss, Hyperparams, Problem};

fn main() -> mspmf::Result<()> {
    let data = generate(&SynthConfig {
        users: 8,
        items: 6,
        density: 0.5,
        user_sources: 1,
        item_sources: 1,
        attributes_per_source: 4,
        source_only_entities: 2,
        ..SynthConfig::default()
    })?;
    let problem = Problem::new(data.ratings, data.sources)?;
    let hyper = Hyperparams {
        k: 3,
        seed: 11,
        ..Hyperparams::default()
    };
    let mut state = ModelState::init(&problem, &hyper);
    // Move away from the near-zero initialization so gradients are not tiny.
    for s in state.sources_mut() {
        s.z.values_mut().iter_mut().enumerate().for_each(|(i, x)| *x += 0.1 * ((i % 7) as f64 - 3.0));
    }
    for (i, x) in state.u.values_mut().iter_mut().enumerate() {
        *x += 0.05 * ((i % 5) as f64 - 2.0);
    }
    for (i, x) in state.v.values_mut().iter_mut().enumerate() {
        *x += 0.07 * ((i % 3) as f64 - 1.0);
    }
    state.sync_shared(&problem);

    let l = loss(&problem, &state, &hyper)?;
    println!("rating term      {:.6}", l.rating_term);
    println!("user sources     {:?}", l.user_source_terms);
    println!("item sources     {:?}", l.item_source_terms);
    println!("regularization   {:.6}", l.regularization);
    println!("total            {:.6}\n", l.total);

    let g = grad(&problem, &state, &hyper)?;
    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..state.u.values().len() {
        let mut plus = state.clone();
        plus.u.values_mut()[i] += h;
        plus.sync_shared(&problem);
        let mut minus = state.clone();
        minus.u.values_mut()[i] -= h;
        minus.sync_shared(&problem);
        let numeric = (loss(&problem, &plus, &hyper)?.total - loss(&problem, &minus, &hyper)?.total) / (2.0 * h);
        let analytic = g.u.values()[i];
        worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8));
    }
    println!("U partials checked: {}, worst relative error {worst:.2e}", state.u.values().len());
    Ok(())
}
