use std::fmt;

use crate::entity::SourceId;
use crate::factors::FactorMatrix;

/// Bytes used to encode one real number on the wire.
pub const REAL_BYTES: u64 = 8;
/// Bytes used to encode one entity key on the wire.
pub const KEY_BYTES: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Master to slave: current global latent vectors of shared entities.
    LatentDown,
    /// Slave to master: partial gradient restricted to shared entities.
    PartialUp,
    /// Slave to master: the slave's part of the objective.
    LocalLossUp,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::LatentDown => "latent_down",
            Direction::PartialUp => "partial_up",
            Direction::LocalLossUp => "local_loss_up",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// k-vectors keyed by entity id (one column per entity).
    Vectors(FactorMatrix),
    Scalar(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientMessage {
    pub round: usize,
    /// The slave at the far end of the link.
    pub link: SourceId,
    pub direction: Direction,
    pub payload: Payload,
    /// Header flag on `LatentDown`: the slave should report its loss but
    /// not its partial gradient. Headers are not metered.
    pub evaluate_only: bool,
}

impl GradientMessage {
    /// `count * k * 8 + count * 8` for keyed vectors, `8` for a scalar.
    pub fn byte_size(&self) -> u64 {
        match &self.payload {
            Payload::Vectors(m) => {
                let count = m.n_cols() as u64;
                count * m.k() as u64 * REAL_BYTES + count * KEY_BYTES
            }
            Payload::Scalar(_) => REAL_BYTES,
        }
    }

    pub fn vectors(&self) -> Option<&FactorMatrix> {
        match &self.payload {
            Payload::Vectors(m) => Some(m),
            Payload::Scalar(_) => None,
        }
    }
}
