use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// A held-out rating and the model's guess, by global positions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub user: usize,
    pub item: usize,
    pub truth: f64,
    pub predicted: f64,
}

pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sq: f64 = pairs.iter().map(|(t, p)| (t - p) * (t - p)).sum();
    Ok((sq / pairs.len() as f64).sqrt())
}

pub fn rmse_of(predictions: &[Prediction]) -> Result<f64> {
    let pairs: Vec<_> = predictions.iter().map(|p| (p.truth, p.predicted)).collect();
    rmse(&pairs)
}

/// Rating-count classes: labels and inclusive upper bounds.
pub const BUCKETS: [(&str, usize); 10] = [
    ("0", 0),
    ("1-5", 5),
    ("6-10", 10),
    ("11-20", 20),
    ("21-40", 40),
    ("41-80", 80),
    ("81-160", 160),
    ("161-320", 320),
    ("321-640", 640),
    (">640", usize::MAX),
];

pub fn bucket_index(count: usize) -> usize {
    BUCKETS
        .iter()
        .position(|&(_, hi)| count <= hi)
        .expect("last bucket is unbounded")
}

pub fn bucket_label(count: usize) -> &'static str {
    BUCKETS[bucket_index(count)].0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketAxis {
    ByUserRatingCount,
    ByItemRatingCount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub label: String,
    pub count: usize,
    /// `None` for an empty bucket.
    pub rmse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub axis: BucketAxis,
    pub buckets: Vec<BucketStat>,
}

impl BucketReport {
    pub fn get(&self, label: &str) -> Option<&BucketStat> {
        self.buckets.iter().find(|b| b.label == label)
    }

    pub fn population(&self) -> usize {
        self.buckets.iter().map(|b| b.count).sum()
    }
}

/// Groups test predictions by how many training ratings their user (or
/// item) has and reports RMSE per group. `counts` comes from the training
/// matrix, one entry per global user (or item).
pub fn bucketed_rmse(predictions: &[Prediction], counts: &[usize], axis: BucketAxis) -> BucketReport {
    let rows = predictions.iter().map(|p| {
        let who = match axis {
            BucketAxis::ByUserRatingCount => p.user,
            BucketAxis::ByItemRatingCount => p.item,
        };
        (counts.get(who).copied().unwrap_or(0), p.truth, p.predicted)
    });
    bucketed_rmse_counted(rows, axis)
}

/// Same as [`bucketed_rmse`] for rows that already carry their rating
/// count: `(count, truth, predicted)`.
pub fn bucketed_rmse_counted(
    rows: impl IntoIterator<Item = (usize, f64, f64)>,
    axis: BucketAxis,
) -> BucketReport {
    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); BUCKETS.len()];
    for (n, truth, predicted) in rows {
        groups[bucket_index(n)].push((truth, predicted));
    }
    let buckets = BUCKETS
        .iter()
        .zip(groups)
        .map(|(&(label, _), g)| BucketStat {
            label: label.to_string(),
            count: g.len(),
            rmse: rmse(&g).ok(),
        })
        .collect();
    BucketReport { axis, buckets }
}

/// Convenience wrapper taking the training matrix directly.
pub fn bucketed_rmse_from_train(
    predictions: &[Prediction],
    train: &SparseMatrix,
    axis: BucketAxis,
) -> BucketReport {
    let counts = match axis {
        BucketAxis::ByUserRatingCount => train.row_counts(),
        BucketAxis::ByItemRatingCount => train.col_counts(),
    };
    bucketed_rmse(predictions, &counts, axis)
}
