use std::collections::{BTreeMap, VecDeque};

use super::ledger::TrafficLedger;
use super::message::{Direction, GradientMessage};
use crate::entity::SourceId;

/// In-process message bus: one ordered queue per link and direction, with
/// every delivered message metered into the ledger.
#[derive(Debug, Default)]
pub struct Bus {
    down: BTreeMap<SourceId, VecDeque<GradientMessage>>,
    up: BTreeMap<SourceId, VecDeque<GradientMessage>>,
    ledger: TrafficLedger,
    log: Vec<GradientMessage>,
    keep_log: bool,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Also keep a copy of every message for inspection.
    pub fn with_log() -> Self {
        Bus {
            keep_log: true,
            ..Self::default()
        }
    }

    pub fn send(&mut self, msg: GradientMessage) {
        self.ledger.record(&msg);
        if self.keep_log {
            self.log.push(msg.clone());
        }
        let queues = match msg.direction {
            Direction::LatentDown => &mut self.down,
            Direction::PartialUp | Direction::LocalLossUp => &mut self.up,
        };
        queues.entry(msg.link).or_default().push_back(msg);
    }

    pub fn recv_down(&mut self, link: SourceId) -> Option<GradientMessage> {
        self.down.get_mut(&link)?.pop_front()
    }

    /// Pops the next upward message on `link` if it has direction `want`.
    pub fn recv_up(&mut self, link: SourceId, want: Direction) -> Option<GradientMessage> {
        let queue = self.up.get_mut(&link)?;
        match queue.front() {
            Some(m) if m.direction == want => queue.pop_front(),
            _ => None,
        }
    }

    /// Drops undelivered messages (e.g. partials sent in the final round).
    pub fn discard_pending(&mut self) {
        self.down.values_mut().for_each(VecDeque::clear);
        self.up.values_mut().for_each(VecDeque::clear);
    }

    pub fn ledger(&self) -> &TrafficLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> TrafficLedger {
        self.ledger
    }

    pub fn drain_log(&mut self) -> Vec<GradientMessage> {
        std::mem::take(&mut self.log)
    }
}
