//! Cluster nodes. The master owns the rating matrix and the global factors;
//! each slave owns exactly one source matrix and that source's factors.
//! Neither ever receives the other's raw data.

use std::collections::HashMap;
use std::sync::Arc;

use super::bus::Bus;
use super::message::{Direction, GradientMessage, Payload};
use crate::dataset::{RatingDataset, SourceMatrix};
use crate::entity::{EntityId, SourceId, SourceKind};
use crate::error::{Error, Result};
use crate::factors::FactorMatrix;
use crate::hyper::{Hyperparams, SourceLambdas};
use crate::labels::Labels;
use crate::objective::{oplus_assign, rating_gradient, rating_loss, source_gradient, source_loss};
use crate::sparse::SparseMatrix;
use crate::train::descend;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Master,
    UserSlave(usize),
    ItemSlave(usize),
}

/// What a node keeps in memory, for isolation checks.
pub trait Holdings {
    fn role(&self) -> Role;
    /// Every raw data matrix this node can reach.
    fn data_matrices(&self) -> Vec<&SparseMatrix>;
}

/// The master's view of one slave: which global columns it shares.
#[derive(Clone, Debug)]
pub struct MasterLink {
    pub slave: SourceId,
    /// Global column positions, in the same order as `ids`.
    pub positions: Vec<usize>,
    pub ids: Arc<Labels>,
}

#[derive(Debug)]
pub struct MasterNode {
    ratings: RatingDataset,
    pub u: FactorMatrix,
    pub v: FactorMatrix,
    links: Vec<MasterLink>,
    lambda_u: f64,
    lambda_v: f64,
    alpha: f64,
}

impl MasterNode {
    /// `links` must be in canonical order: user slaves by ascending index,
    /// then item slaves by ascending index.
    pub fn new(
        ratings: RatingDataset,
        u: FactorMatrix,
        v: FactorMatrix,
        links: Vec<MasterLink>,
        hyper: &Hyperparams,
    ) -> Self {
        MasterNode {
            ratings,
            u,
            v,
            links,
            lambda_u: hyper.lambda_u,
            lambda_v: hyper.lambda_v,
            alpha: hyper.alpha,
        }
    }

    pub fn links(&self) -> &[MasterLink] {
        &self.links
    }

    /// Sends each slave the current global vectors of the entities it shares.
    pub fn broadcast_latents(&self, round: usize, evaluate_only: bool, bus: &mut Bus) {
        for link in &self.links {
            let global = match link.slave.kind {
                SourceKind::User => &self.u,
                SourceKind::Item => &self.v,
            };
            let k = global.k();
            let mut values = Vec::with_capacity(k * link.positions.len());
            for &p in &link.positions {
                values.extend_from_slice(global.col(p));
            }
            let vectors = FactorMatrix::from_values(k, link.ids.clone(), values)
                .expect("shape follows from link table");
            bus.send(GradientMessage {
                round,
                link: link.slave,
                direction: Direction::LatentDown,
                payload: Payload::Vectors(vectors),
                evaluate_only,
            });
        }
    }

    /// The master's own part of the objective: rating reconstruction plus
    /// the `U`/`V` regularizers.
    pub fn local_loss(&self) -> f64 {
        rating_loss(&self.ratings.ratings, &self.u, &self.v)
            + 0.5 * self.lambda_u * self.u.frobenius_sq()
            + 0.5 * self.lambda_v * self.v.frobenius_sq()
    }

    /// Waits for every slave's loss report and returns the global objective.
    pub fn collect_losses(&self, bus: &mut Bus) -> Result<f64> {
        let mut total = self.local_loss();
        for link in &self.links {
            let msg = bus
                .recv_up(link.slave, Direction::LocalLossUp)
                .ok_or_else(|| missing(link.slave))?;
            match msg.payload {
                Payload::Scalar(x) => total += x,
                Payload::Vectors(_) => return Err(missing(link.slave)),
            }
        }
        Ok(total)
    }

    /// One descent step on `U` and `V`: local rating gradient, then every
    /// slave's partial merged with `oplus` in link order. Returns the
    /// largest absolute parameter change.
    pub fn apply_partials(&mut self, bus: &mut Bus) -> Result<f64> {
        let (mut gu, mut gv) = rating_gradient(
            &self.ratings.ratings,
            &self.u,
            &self.v,
            self.lambda_u,
            self.lambda_v,
        );
        for link in &self.links {
            let msg = bus
                .recv_up(link.slave, Direction::PartialUp)
                .ok_or_else(|| missing(link.slave))?;
            let Payload::Vectors(partial) = msg.payload else {
                return Err(missing(link.slave));
            };
            match link.slave.kind {
                SourceKind::User => oplus_assign(&mut gu, &partial)?,
                SourceKind::Item => oplus_assign(&mut gv, &partial)?,
            }
        }
        let step_u = descend(&mut self.u, &gu, self.alpha);
        let step_v = descend(&mut self.v, &gv, self.alpha);
        Ok(step_u.max(step_v))
    }
}

impl Holdings for MasterNode {
    fn role(&self) -> Role {
        Role::Master
    }

    fn data_matrices(&self) -> Vec<&SparseMatrix> {
        vec![&self.ratings.ratings]
    }
}

fn missing(slave: SourceId) -> Error {
    Error::MissingSlaveReply {
        slave: slave.to_string(),
    }
}

/// A slave cluster holding one user or item source.
#[derive(Debug)]
pub struct SlaveNode {
    source: SourceMatrix,
    /// Entity factors; tied columns hold the last vectors received.
    pub local: FactorMatrix,
    pub z: FactorMatrix,
    entity_lambda: f64,
    lambdas: SourceLambdas,
    alpha: f64,
    /// Entity id to local column, for tied entities only.
    tied: HashMap<EntityId, usize>,
    /// Local step computed in the previous round, applied once the master
    /// starts the next round.
    pending: Option<(FactorMatrix, FactorMatrix)>,
}

impl SlaveNode {
    pub fn new(source: SourceMatrix, local: FactorMatrix, z: FactorMatrix, hyper: &Hyperparams) -> Self {
        let tied = source
            .shared
            .shared
            .iter()
            .map(|s| (s.id.clone(), s.local))
            .collect();
        SlaveNode {
            tied,
            entity_lambda: hyper.entity_lambda(source.kind()),
            lambdas: hyper.source_lambdas(source.id),
            alpha: hyper.alpha,
            source,
            local,
            z,
            pending: None,
        }
    }

    pub fn id(&self) -> SourceId {
        self.source.id
    }

    /// Entities this slave shares with the master.
    pub fn shared_ids(&self) -> impl Iterator<Item = &EntityId> {
        self.source.shared.ids()
    }

    /// Handles one `LatentDown`: commits the previous local step, replaces
    /// tied columns with the received vectors, and replies with its loss
    /// and (unless evaluating only) its partial gradient.
    pub fn handle(&mut self, msg: &GradientMessage) -> Result<Vec<GradientMessage>> {
        let latents = msg.vectors().ok_or_else(|| {
            Error::DimensionMismatch(format!("slave {} expected latent vectors", self.id()))
        })?;
        if latents.k() != self.local.k() {
            return Err(Error::RowCountMismatch {
                left: self.local.k(),
                right: latents.k(),
            });
        }
        if let Some((g_local, g_z)) = self.pending.take() {
            descend(&mut self.local, &g_local, self.alpha);
            descend(&mut self.z, &g_z, self.alpha);
        }
        self.overwrite_shared(latents)?;

        let id = self.id();
        let loss = source_loss(&self.source, &self.local, &self.z, self.entity_lambda, self.lambdas);
        let mut replies = vec![GradientMessage {
            round: msg.round,
            link: id,
            direction: Direction::LocalLossUp,
            payload: Payload::Scalar(loss.total()),
            evaluate_only: false,
        }];
        if !msg.evaluate_only {
            let g = source_gradient(&self.source, &self.local, &self.z, self.entity_lambda, self.lambdas);
            replies.push(GradientMessage {
                round: msg.round,
                link: id,
                direction: Direction::PartialUp,
                payload: Payload::Vectors(g.partial),
                evaluate_only: false,
            });
            self.pending = Some((g.local, g.z));
        }
        Ok(replies)
    }

    fn overwrite_shared(&mut self, latents: &FactorMatrix) -> Result<()> {
        for (c, id) in latents.labels().iter().enumerate() {
            let local = *self
                .tied
                .get(id)
                .ok_or_else(|| Error::UnknownEntityInMessage {
                    slave: self.source.id.to_string(),
                    entity: id.clone(),
                })?;
            self.local.col_mut(local).copy_from_slice(latents.col(c));
        }
        Ok(())
    }

    /// Drops a computed but uncommitted step (the master stopped).
    pub fn abandon_pending(&mut self) {
        self.pending = None;
    }
}

impl Holdings for SlaveNode {
    fn role(&self) -> Role {
        match self.source.id.kind {
            SourceKind::User => Role::UserSlave(self.source.id.index),
            SourceKind::Item => Role::ItemSlave(self.source.id.index),
        }
    }

    fn data_matrices(&self) -> Vec<&SparseMatrix> {
        vec![&self.source.matrix]
    }
}
