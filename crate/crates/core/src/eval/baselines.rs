//! Mean predictors. Entities with no training ratings fall back to the
//! global training mean.

use super::metrics::Prediction;
use crate::dataset::RatingDataset;

fn global_mean(train: &RatingDataset) -> f64 {
    let entries = train.ratings.entries();
    if entries.is_empty() {
        return 0.5 * (train.scale_lo + train.scale_hi);
    }
    entries.iter().map(|e| e.value).sum::<f64>() / entries.len() as f64
}

fn group_means(train: &RatingDataset, n: usize, key: impl Fn(usize, usize) -> usize) -> Vec<Option<f64>> {
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for e in train.ratings.entries() {
        let g = key(e.row, e.col);
        sum[g] += e.value;
        count[g] += 1;
    }
    sum.into_iter()
        .zip(count)
        .map(|(s, c)| (c > 0).then(|| s / c as f64))
        .collect()
}

fn predict_with(test: &RatingDataset, means: &[Option<f64>], fallback: f64, key: impl Fn(usize, usize) -> usize) -> Vec<Prediction> {
    test.ratings
        .entries()
        .iter()
        .map(|e| Prediction {
            user: e.row,
            item: e.col,
            truth: e.value,
            predicted: means.get(key(e.row, e.col)).copied().flatten().unwrap_or(fallback),
        })
        .collect()
}

/// Predicts each test rating with its user's mean training rating.
pub fn baseline_user_mean(train: &RatingDataset, test: &RatingDataset) -> Vec<Prediction> {
    let means = group_means(train, train.ratings.n_rows(), |r, _| r);
    predict_with(test, &means, global_mean(train), |r, _| r)
}

/// Predicts each test rating with its item's mean training rating.
pub fn baseline_item_mean(train: &RatingDataset, test: &RatingDataset) -> Vec<Prediction> {
    let means = group_means(train, train.ratings.n_cols(), |_, c| c);
    predict_with(test, &means, global_mean(train), |_, c| c)
}
