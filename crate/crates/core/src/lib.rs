//! Mental-workload and perceptual-load estimation for drivers.
//!
//! The pipeline runs from raw session recordings (RR intervals, pupil
//! diameter, lane-change driving traces, secondary-task events) to an
//! eight-feature vector per segment, through reliability and significance
//! statistics, to classifier training and participant-level nested
//! cross-validation reports.
//!
//! - [`model`], [`io`], [`validate`]: domain types, on-disk format, checks
//! - [`cardiac`], [`pupil`], [`driving`]: feature extraction
//! - [`stats`]: descriptives, correlations, reliability, t-tests
//! - [`learn`]: scaler, LDA, KNN, AdaBoost, grid search, greedy ensembles
//! - [`eval`]: split plans, featurization, nested CV, report rendering
//! - [`synth`]: deterministic synthetic sessions

pub mod cardiac;
pub mod driving;
pub mod error;
pub mod eval;
pub mod io;
pub mod learn;
pub mod model;
pub mod pupil;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod task;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    Dataset, Feature, FeatureRow, FeatureVector, LoadLevel, SessionSegment, TaskKind, FEATURE_COUNT,
};

/// Version stamped into every file the toolkit writes.
pub const FORMAT_VERSION: u32 = 1;
