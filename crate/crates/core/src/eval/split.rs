use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::RatingDataset;
use crate::error::{Error, Result};
use crate::sparse::Entry;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    /// Share of observed ratings used for training, strictly inside (0, 1).
    pub train_fraction: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            repetitions: 5,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64, repetitions: usize, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train_fraction,
            repetitions,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidSplit(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidSplit("at least one repetition is required".into()));
        }
        Ok(())
    }

    /// Number of training ratings out of `nnz`.
    pub fn train_size(&self, nnz: usize) -> usize {
        ((nnz as f64) * self.train_fraction).round() as usize
    }
}

/// One train/test partition. Both halves keep the full user and item label
/// sets, so a user whose ratings all landed in the test half still has a
/// latent column.
#[derive(Clone, Debug)]
pub struct Split {
    pub repetition: usize,
    pub train: RatingDataset,
    pub test: RatingDataset,
}

/// Partitions the observed ratings uniformly at random, once per repetition.
/// Repetition `r` depends only on `(spec.seed, r)`.
pub fn split(ratings: &RatingDataset, spec: &SplitSpec) -> Result<Vec<Split>> {
    spec.validate()?;
    let entries = ratings.ratings.entries();
    let n_train = spec.train_size(entries.len());
    (0..spec.repetitions)
        .map(|repetition| {
            let mut rng = crate::rng::stream(spec.seed, &format!("split/{repetition}"));
            let mut order: Vec<usize> = (0..entries.len()).collect();
            order.shuffle(&mut rng);
            let mut in_train = vec![false; entries.len()];
            for &i in &order[..n_train] {
                in_train[i] = true;
            }
            let (train, test): (Vec<(usize, &Entry)>, Vec<(usize, &Entry)>) =
                entries.iter().enumerate().partition(|(i, _)| in_train[*i]);
            let collect = |part: Vec<(usize, &Entry)>| part.into_iter().map(|(_, e)| *e).collect();
            Ok(Split {
                repetition,
                train: ratings.with_ratings(ratings.ratings.with_entries(collect(train))?),
                test: ratings.with_ratings(ratings.ratings.with_entries(collect(test))?),
            })
        })
        .collect()
}
