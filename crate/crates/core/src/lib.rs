//! Multi-source probabilistic matrix factorization.
//!
//! A rating matrix is factorized jointly with any number of user-attribute
//! and item-attribute matrices whose entity factors are tied to the global
//! user and item factors. Training runs either as centralized gradient
//! descent ([`train`]) or as a deterministic simulation of a master cluster
//! exchanging latent vectors and partial gradients with one slave cluster
//! per source ([`distributed`]), with per-link byte accounting.

pub mod dataset;
pub mod distributed;
pub mod entity;
pub mod error;
pub mod eval;
pub mod factors;
pub mod hyper;
pub mod io;
pub mod labels;
pub mod objective;
pub mod rng;
pub mod sparse;
pub mod train;

pub mod cli;

pub use dataset::{align_source, AlignmentReport, Problem, RatingDataset, SourceMatrix};
pub use entity::{EntityId, Namespace, SourceId, SourceKind};
pub use error::{Error, Result};
pub use factors::{init_factors, FactorMatrix};
pub use hyper::{Hyperparams, SourceLambdas};
pub use labels::Labels;
pub use objective::{grad, loss, oplus, predict, LossBreakdown, ModelState};
pub use sparse::SparseMatrix;
pub use train::{train_centralized, Termination, TrainTrace};
