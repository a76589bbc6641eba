//! Deterministic simulation of the master/slave training protocol.
//!
//! One round of the simulation:
//!
//! 1. the master sends each slave the global vectors of the entities they
//!    share (`LatentDown`);
//! 2. each slave commits the local step it computed last round, overwrites
//!    its tied columns with the received vectors, and replies with its
//!    part of the objective (`LocalLossUp`) and its partial gradient for
//!    the tied entities (`PartialUp`);
//! 3. the master adds its own loss terms to the slave reports, which gives
//!    the objective after the previous round's update, and checks the stop
//!    condition;
//! 4. if training continues, the master merges all partials into its own
//!    gradient and steps `U` and `V`.
//!
//! Because a slave needs the updated global vectors to evaluate its loss,
//! the loss for iteration `t` becomes known in round `t + 1`. A run of `n`
//! iterations therefore ends with a closing round that only reports losses
//! (or, when the stop was a convergence check, whose partials are dropped).

mod bus;
mod ledger;
mod message;
mod node;
mod transfer;

use std::sync::Arc;

pub use bus::Bus;
pub use ledger::{LedgerRow, TrafficLedger};
pub use message::{Direction, GradientMessage, Payload, KEY_BYTES, REAL_BYTES};
pub use node::{Holdings, MasterLink, MasterNode, Role, SlaveNode};
pub use transfer::{binary_units, format_bytes, transfer_report, TransferReport};

use crate::dataset::{Problem, SourceMatrix};
use crate::error::Result;
use crate::hyper::Hyperparams;
use crate::labels::Labels;
use crate::objective::{ModelState, SourceFactors};
use crate::train::{IterationRecord, StopGuard, Termination, TrainTrace};

/// Order in which slaves process a round's messages. Results do not depend
/// on it; it exists so that tests can show that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    #[default]
    Ascending,
    Descending,
    /// Every slave on its own thread.
    Threaded,
}

/// Hooks into a running simulation.
pub trait Observer {
    /// Called once per round with every message sent during it.
    fn on_messages(&mut self, _round: usize, _messages: &[GradientMessage]) {}
    /// Called at the end of every round.
    fn on_round_end(&mut self, _round: usize, _cluster: &Cluster) {}
}

impl Observer for () {}

pub struct Cluster {
    pub master: MasterNode,
    /// Canonical order: user slaves by index, then item slaves by index.
    pub slaves: Vec<SlaveNode>,
}

impl Cluster {
    /// Builds the master and one slave per source, each initialized exactly
    /// as the centralized trainer would initialize the same matrices.
    pub fn new(problem: &Problem, hyper: &Hyperparams) -> Self {
        let init = ModelState::init(problem, hyper);
        let links = problem.sources().map(master_link).collect();
        let master = MasterNode::new(problem.ratings.clone(), init.u, init.v, links, hyper);
        let slaves = problem
            .sources()
            .zip(init.user_sources.into_iter().chain(init.item_sources))
            .map(|(s, f)| SlaveNode::new(s.clone(), f.local, f.z, hyper))
            .collect();
        Cluster { master, slaves }
    }

    fn run_slaves(&mut self, bus: &mut Bus, schedule: Schedule) -> Result<()> {
        let inbox: Vec<_> = self
            .slaves
            .iter()
            .map(|s| bus.recv_down(s.id()))
            .collect();
        let handle = |slave: &mut SlaveNode, msg: Option<GradientMessage>| match msg {
            Some(m) => slave.handle(&m),
            None => Ok(Vec::new()),
        };
        let replies: Vec<Result<Vec<GradientMessage>>> = match schedule {
            Schedule::Ascending => self
                .slaves
                .iter_mut()
                .zip(inbox)
                .map(|(s, m)| handle(s, m))
                .collect(),
            Schedule::Descending => self
                .slaves
                .iter_mut()
                .zip(inbox)
                .rev()
                .map(|(s, m)| handle(s, m))
                .collect(),
            Schedule::Threaded => std::thread::scope(|scope| {
                let handles: Vec<_> = self
                    .slaves
                    .iter_mut()
                    .zip(inbox)
                    .map(|(s, m)| scope.spawn(move || handle(s, m)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("slave thread panicked"))
                    .collect()
            }),
        };
        for r in replies {
            for msg in r? {
                bus.send(msg);
            }
        }
        Ok(())
    }

    /// Global state: the master's `U`, `V` and every slave's committed
    /// factors with tied columns taken from the master.
    pub fn assemble(&self, problem: &Problem) -> ModelState {
        let mut sources = self.slaves.iter().map(|s| SourceFactors {
            id: s.id(),
            local: s.local.clone(),
            z: s.z.clone(),
        });
        let user_sources = sources.by_ref().take(problem.user_sources.len()).collect();
        let item_sources = sources.collect();
        let mut state = ModelState {
            u: self.master.u.clone(),
            v: self.master.v.clone(),
            user_sources,
            item_sources,
        };
        state.sync_shared(problem);
        state
    }
}

fn master_link(source: &SourceMatrix) -> MasterLink {
    MasterLink {
        slave: source.id,
        positions: source.shared.shared.iter().map(|s| s.global).collect(),
        ids: Arc::new(Labels::from_ids(source.shared.ids().cloned())),
    }
}

#[derive(Debug)]
pub struct DistributedRun {
    pub state: ModelState,
    /// Same losses as the centralized trainer; `max_update` covers only the
    /// master's `U` and `V`.
    pub trace: TrainTrace,
    pub ledger: TrafficLedger,
}

pub fn run_distributed(problem: &Problem, hyper: &Hyperparams) -> Result<DistributedRun> {
    run_distributed_with(problem, hyper, Schedule::default(), &mut ())
}

pub fn run_distributed_with(
    problem: &Problem,
    hyper: &Hyperparams,
    schedule: Schedule,
    observer: &mut dyn Observer,
) -> Result<DistributedRun> {
    hyper.validate()?;
    let mut cluster = Cluster::new(problem, hyper);
    let mut bus = Bus::with_log();
    let mut trace = TrainTrace {
        initial_loss: f64::NAN,
        records: Vec::new(),
        termination: Termination::MaxIters,
    };
    let mut guard: Option<StopGuard> = None;
    let mut last_step = 0.0;

    for round in 1.. {
        let finished_iters = round - 1;
        let evaluate_only = finished_iters >= hyper.max_iters;
        cluster.master.broadcast_latents(round, evaluate_only, &mut bus);
        cluster.run_slaves(&mut bus, schedule)?;
        let loss = cluster.master.collect_losses(&mut bus)?;

        let stop = match guard.as_mut() {
            None => {
                trace.initial_loss = loss;
                guard = Some(StopGuard::new(hyper, loss));
                if !loss.is_finite() {
                    Some(Termination::Diverged)
                } else if evaluate_only {
                    Some(Termination::MaxIters)
                } else {
                    None
                }
            }
            Some(g) => {
                trace.records.push(IterationRecord {
                    iteration: finished_iters,
                    loss,
                    max_update: last_step,
                });
                g.observe(finished_iters, loss)
            }
        };

        if let Some(reason) = stop {
            trace.termination = reason;
            bus.discard_pending();
            cluster.slaves.iter_mut().for_each(SlaveNode::abandon_pending);
            observer.on_messages(round, &bus.drain_log());
            observer.on_round_end(round, &cluster);
            break;
        }
        last_step = cluster.master.apply_partials(&mut bus)?;
        observer.on_messages(round, &bus.drain_log());
        observer.on_round_end(round, &cluster);
    }

    Ok(DistributedRun {
        state: cluster.assemble(problem),
        trace,
        ledger: bus.into_ledger(),
    })
}
