//! Participant-level nested cross-validation and its reports.

mod cv;
mod features;
mod report;
mod split;
mod train;

pub use cv::{run_nested_cv, ClassScheme, CvOptions, EvaluationReport, FeatureSubset, ReportCell};
pub use features::{features_csv, featurize_dataset, featurize_segment, FeatureConfig};
pub use report::{caption, parse_report_csv, render_report, ReportFormat};
pub use split::{holdout_split, make_split_plan, Fold, SplitPlan};
pub use train::{train_model, RankedConfig, TrainOutcome};

pub const DEFAULT_OUTER_FOLDS: usize = 5;
