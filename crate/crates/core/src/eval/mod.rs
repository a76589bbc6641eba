//! Splitting, metrics, baselines, and experiment drivers.

mod baselines;
mod experiment;
mod metrics;
mod split;
mod sweep;
pub mod synth;

pub use baselines::{baseline_item_mean, baseline_user_mean};
pub use experiment::{bucket_report, evaluate, predict_test, EvaluationReport, RepetitionResult, TrainMode};
pub use metrics::{
    bucket_index, bucket_label, bucketed_rmse, bucketed_rmse_counted, bucketed_rmse_from_train, rmse, rmse_of,
    BucketAxis, BucketReport, BucketStat, Prediction, BUCKETS,
};
pub use split::{split, Split, SplitSpec};
pub use sweep::{max_sources, select_sources, source_sweep, SweepMode, SweepRow, SweepTable};
