use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::message::{Direction, GradientMessage};
use crate::entity::SourceId;

/// Byte counts per (round, link, direction).
///
/// Keys are ordered, so the ledger does not depend on the order in which
/// slaves happen to reply.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrafficLedger {
    cells: BTreeMap<(usize, SourceId, Direction), u64>,
    messages: u64,
    total: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerRow {
    pub iteration: usize,
    pub link: SourceId,
    pub direction: Direction,
    pub bytes: u64,
}

impl TrafficLedger {
    pub fn record(&mut self, msg: &GradientMessage) {
        let bytes = msg.byte_size();
        *self
            .cells
            .entry((msg.round, msg.link, msg.direction))
            .or_default() += bytes;
        self.messages += 1;
        self.total += bytes;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn message_count(&self) -> u64 {
        self.messages
    }

    pub fn rows(&self) -> impl Iterator<Item = LedgerRow> + '_ {
        self.cells
            .iter()
            .map(|(&(iteration, link, direction), &bytes)| LedgerRow {
                iteration,
                link,
                direction,
                bytes,
            })
    }

    pub fn total_for_round(&self, round: usize) -> u64 {
        self.rows().filter(|r| r.iteration == round).map(|r| r.bytes).sum()
    }

    pub fn total_for_direction(&self, direction: Direction) -> u64 {
        self.rows()
            .filter(|r| r.direction == direction)
            .map(|r| r.bytes)
            .sum()
    }

    /// `iteration<TAB>link<TAB>direction<TAB>bytes`, one line per cell.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in self.rows() {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.iteration, r.link, r.direction, r.bytes);
        }
        out
    }
}
