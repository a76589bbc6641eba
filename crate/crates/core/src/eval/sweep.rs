use serde::{Deserialize, Serialize};

use super::experiment::{mean, predict_test, TrainMode};
use super::metrics::rmse_of;
use super::split::{split, SplitSpec};
use crate::dataset::{Problem, RatingDataset, SourceMatrix};
use crate::entity::SourceKind;
use crate::error::Result;
use crate::hyper::Hyperparams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    UserOnly,
    ItemOnly,
    /// `c` sources means `c` user sources and `c` item sources.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sources: usize,
    pub mean_rmse: f64,
    pub rmse_per_repetition: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub mode: SweepMode,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sources\tmean_rmse\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\n", r.sources, r.mean_rmse));
        }
        out
    }
}

/// The first `count` sources of the requested kind(s), in the given order.
pub fn select_sources(ordered: &[SourceMatrix], mode: SweepMode, count: usize) -> Vec<SourceMatrix> {
    let take = |kind: SourceKind| ordered.iter().filter(move |s| s.kind() == kind).take(count).cloned();
    match mode {
        SweepMode::UserOnly => take(SourceKind::User).collect(),
        SweepMode::ItemOnly => take(SourceKind::Item).collect(),
        SweepMode::Both => take(SourceKind::User).chain(take(SourceKind::Item)).collect(),
    }
}

pub fn max_sources(ordered: &[SourceMatrix], mode: SweepMode) -> usize {
    let n = |kind| ordered.iter().filter(|s| s.kind() == kind).count();
    match mode {
        SweepMode::UserOnly => n(SourceKind::User),
        SweepMode::ItemOnly => n(SourceKind::Item),
        SweepMode::Both => n(SourceKind::User).min(n(SourceKind::Item)),
    }
}

/// Test RMSE as sources are added one at a time. Row `0` trains on the
/// rating matrix alone. Every row reuses the same splits.
pub fn source_sweep(
    ratings: &RatingDataset,
    ordered: &[SourceMatrix],
    spec: &SplitSpec,
    hyper: &Hyperparams,
    mode: SweepMode,
    trainer: TrainMode,
) -> Result<SweepTable> {
    let splits = split(ratings, spec)?;
    let mut rows = Vec::new();
    for count in 0..=max_sources(ordered, mode) {
        let chosen = select_sources(ordered, mode, count);
        let mut rmses = Vec::with_capacity(splits.len());
        for s in &splits {
            let problem = Problem::new(s.train.clone(), chosen.clone())?;
            let (state, _) = trainer.fit(&problem, hyper)?;
            rmses.push(rmse_of(&predict_test(&state, &s.test))?);
        }
        rows.push(SweepRow {
            sources: count,
            mean_rmse: mean(rmses.iter().copied()),
            rmse_per_repetition: rmses,
        });
    }
    Ok(SweepTable { mode, rows })
}
