use serde::{Deserialize, Serialize};

use super::baselines::{baseline_item_mean, baseline_user_mean};
use super::metrics::{bucketed_rmse_counted, bucketed_rmse_from_train, rmse_of, BucketAxis, BucketReport, Prediction};
use super::split::{split, SplitSpec};
use crate::dataset::{Problem, RatingDataset};
use crate::distributed::run_distributed;
use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::objective::{predict_at, ModelState};
use crate::train::{train_centralized, Termination, TrainTrace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    #[default]
    Central,
    Distributed,
}

impl TrainMode {
    pub fn fit(&self, problem: &Problem, hyper: &Hyperparams) -> Result<(ModelState, TrainTrace)> {
        match self {
            TrainMode::Central => train_centralized(problem, hyper),
            TrainMode::Distributed => run_distributed(problem, hyper).map(|r| (r.state, r.trace)),
        }
    }
}

/// Model predictions for every rating in `test`.
pub fn predict_test(state: &ModelState, test: &RatingDataset) -> Vec<Prediction> {
    test.ratings
        .entries()
        .iter()
        .map(|e| Prediction {
            user: e.row,
            item: e.col,
            truth: e.value,
            predicted: predict_at(state, e.row, e.col, test),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub test_size: usize,
    pub rmse: f64,
    pub user_mean_rmse: f64,
    pub item_mean_rmse: f64,
    pub iterations: usize,
    pub termination: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub train_fraction: f64,
    pub repetitions: Vec<RepetitionResult>,
    pub mean_rmse: f64,
    pub mean_user_mean_rmse: f64,
    pub mean_item_mean_rmse: f64,
    /// Pooled over all repetitions; counts come from each repetition's own
    /// training half.
    pub user_buckets: BucketReport,
    pub item_buckets: BucketReport,
}

impl EvaluationReport {
    pub fn diverged(&self) -> bool {
        self.repetitions.iter().any(|r| r.termination == Termination::Diverged.as_str())
    }
}

pub(crate) fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Split, train, and score once per repetition.
pub fn evaluate(problem: &Problem, spec: &SplitSpec, hyper: &Hyperparams, mode: TrainMode) -> Result<EvaluationReport> {
    let splits = split(&problem.ratings, spec)?;
    let mut repetitions = Vec::new();
    let mut pooled: Vec<(Prediction, usize, usize)> = Vec::new();
    for s in &splits {
        if s.test.ratings.nnz() == 0 {
            return Err(Error::InvalidSplit("test half is empty".into()));
        }
        let train_problem = problem.with_ratings(s.train.clone())?;
        let (state, trace) = mode.fit(&train_problem, hyper)?;
        let preds = predict_test(&state, &s.test);
        let user_counts = s.train.ratings.row_counts();
        let item_counts = s.train.ratings.col_counts();
        pooled.extend(preds.iter().map(|p| (*p, user_counts[p.user], item_counts[p.item])));
        repetitions.push(RepetitionResult {
            repetition: s.repetition,
            test_size: preds.len(),
            rmse: rmse_of(&preds)?,
            user_mean_rmse: rmse_of(&baseline_user_mean(&s.train, &s.test))?,
            item_mean_rmse: rmse_of(&baseline_item_mean(&s.train, &s.test))?,
            iterations: trace.records.len(),
            termination: trace.termination.as_str().to_string(),
        });
    }
    let buckets = |axis: BucketAxis| {
        let rows = pooled.iter().map(|(p, user_n, item_n)| {
            let n = match axis {
                BucketAxis::ByUserRatingCount => *user_n,
                BucketAxis::ByItemRatingCount => *item_n,
            };
            (n, p.truth, p.predicted)
        });
        bucketed_rmse_counted(rows, axis)
    };
    Ok(EvaluationReport {
        train_fraction: spec.train_fraction,
        mean_rmse: mean(repetitions.iter().map(|r| r.rmse)),
        mean_user_mean_rmse: mean(repetitions.iter().map(|r| r.user_mean_rmse)),
        mean_item_mean_rmse: mean(repetitions.iter().map(|r| r.item_mean_rmse)),
        user_buckets: buckets(BucketAxis::ByUserRatingCount),
        item_buckets: buckets(BucketAxis::ByItemRatingCount),
        repetitions,
    })
}

/// Bucketed RMSE for one trained model on one split.
pub fn bucket_report(state: &ModelState, train: &RatingDataset, test: &RatingDataset, axis: BucketAxis) -> BucketReport {
    bucketed_rmse_from_train(&predict_test(state, test), &train.ratings, axis)
}
