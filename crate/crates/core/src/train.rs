//! Centralized full-batch gradient descent over the joint objective.

use std::fmt::Write as _;

use crate::dataset::Problem;
use crate::error::Result;
use crate::factors::FactorMatrix;
use crate::hyper::Hyperparams;
use crate::objective::{grad, loss, ModelState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    Diverged,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective value after this iteration's update.
    pub loss: f64,
    /// Largest absolute change of any parameter in this iteration.
    pub max_update: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    /// Objective value at the initial factors.
    pub initial_loss: f64,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(self.initial_loss, |r| r.loss)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    /// `iter<TAB>loss<TAB>max_update`, one line per iteration, preceded by
    /// iteration 0 holding the initial loss.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("0\t{}\t0\n", self.initial_loss);
        for r in &self.records {
            let _ = writeln!(out, "{}\t{}\t{}", r.iteration, r.loss, r.max_update);
        }
        out
    }
}

/// Decides when descent stops. Shared by the centralized trainer and the
/// simulated master so both stop at the same iteration.
#[derive(Clone, Debug)]
pub struct StopGuard {
    epsilon: f64,
    max_iters: usize,
    previous: f64,
}

impl StopGuard {
    pub fn new(hyper: &Hyperparams, initial_loss: f64) -> Self {
        StopGuard {
            epsilon: hyper.epsilon,
            max_iters: hyper.max_iters,
            previous: initial_loss,
        }
    }

    /// Feeds the loss reached after `iteration`; returns why to stop, if so.
    /// A loss increase never counts as convergence.
    pub fn observe(&mut self, iteration: usize, current: f64) -> Option<Termination> {
        if !current.is_finite() {
            return Some(Termination::Diverged);
        }
        let decrease = (self.previous - current) / self.previous.max(1e-12);
        self.previous = current;
        if decrease >= 0.0 && decrease < self.epsilon {
            return Some(Termination::Converged);
        }
        if iteration >= self.max_iters {
            return Some(Termination::MaxIters);
        }
        None
    }
}

/// `x -= alpha * g`; returns the largest absolute step.
pub(crate) fn descend(x: &mut FactorMatrix, g: &FactorMatrix, alpha: f64) -> f64 {
    let mut max_step = 0.0f64;
    for (p, d) in x.values_mut().iter_mut().zip(g.values()) {
        let step = alpha * d;
        *p -= step;
        max_step = max_step.max(step.abs());
    }
    max_step
}

/// Runs gradient descent from the seeded initial state until the guard
/// fires. Divergence is reported in the trace, not as an error.
pub fn train_centralized(problem: &Problem, hyper: &Hyperparams) -> Result<(ModelState, TrainTrace)> {
    hyper.validate()?;
    let mut state = ModelState::init(problem, hyper);
    train_from(problem, hyper, &mut state).map(|trace| (state, trace))
}

/// Same as [`train_centralized`] but starting from a caller-supplied state.
pub fn train_from(problem: &Problem, hyper: &Hyperparams, state: &mut ModelState) -> Result<TrainTrace> {
    let initial_loss = loss(problem, state, hyper)?.total;
    let mut trace = TrainTrace {
        initial_loss,
        records: Vec::new(),
        termination: Termination::MaxIters,
    };
    if !initial_loss.is_finite() {
        trace.termination = Termination::Diverged;
        return Ok(trace);
    }
    if hyper.max_iters == 0 {
        return Ok(trace);
    }
    let mut guard = StopGuard::new(hyper, initial_loss);
    for iteration in 1.. {
        let g = grad(problem, state, hyper)?;
        let mut max_update = descend(&mut state.u, &g.u, hyper.alpha);
        max_update = max_update.max(descend(&mut state.v, &g.v, hyper.alpha));
        for (f, gf) in state.sources_mut().zip(g.sources()) {
            max_update = max_update.max(descend(&mut f.local, &gf.local, hyper.alpha));
            max_update = max_update.max(descend(&mut f.z, &gf.z, hyper.alpha));
        }
        state.sync_shared(problem);
        let current = loss(problem, state, hyper)?.total;
        trace.records.push(IterationRecord {
            iteration,
            loss: current,
            max_update,
        });
        if let Some(reason) = guard.observe(iteration, current) {
            trace.termination = reason;
            break;
        }
    }
    Ok(trace)
}
