use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cardiac::{cardiac_features, RrPolicy};
use crate::driving::{drive_avg_dev, DrivingConfig};
use crate::model::{Dataset, Feature, FeatureRow, FeatureVector, SessionSegment, TaskKind};
use crate::pupil::{eye_lhipa, WaveletSpec, DEFAULT_PUPIL_RATE_HZ};
use crate::task::{nback_rate, visual_search_perf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub rr_policy: RrPolicy,
    pub driving: DrivingConfig,
    pub pupil_rate_hz: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            rr_policy: RrPolicy::default(),
            driving: DrivingConfig::default(),
            pupil_rate_hz: DEFAULT_PUPIL_RATE_HZ,
        }
    }
}

/// One feature row for a segment. Channels that cannot be computed are
/// left missing.
pub fn featurize_segment(seg: &SessionSegment, config: &FeatureConfig) -> FeatureRow {
    let mut fv = FeatureVector::default();
    if let Ok(c) = cardiac_features(&seg.rr_ms(), &config.rr_policy) {
        fv.set(Feature::HrMean, Some(c.hr_mean));
        fv.set(Feature::HrMin, Some(c.hr_min));
        fv.set(Feature::HrMax, Some(c.hr_max));
        fv.set(Feature::HrStd, Some(c.hr_std));
        fv.set(Feature::HrvRmssd, c.rmssd);
    }
    let spec = WaveletSpec::sym16();
    fv.set(Feature::LhipaLeft, eye_lhipa(&seg.pupil_left, &spec, config.pupil_rate_hz).ok());
    fv.set(Feature::LhipaRight, eye_lhipa(&seg.pupil_right, &spec, config.pupil_rate_hz).ok());
    if !seg.driving.is_empty() {
        fv.set(Feature::DriveAvgDev, drive_avg_dev(&seg.driving, &config.driving).ok());
    }
    let task_score = match seg.task {
        TaskKind::NBack => nback_rate(&seg.events).ok(),
        TaskKind::VisualSearch => visual_search_perf(&seg.events).ok().and_then(|p| p.mean_rt_s),
    };
    FeatureRow {
        participant_id: seg.participant_id.clone(),
        task: seg.task,
        level: seg.level,
        features: fv,
        task_score,
    }
}

/// Feature rows in dataset order (participant, task, level).
pub fn featurize_dataset(dataset: &Dataset, config: &FeatureConfig) -> Vec<FeatureRow> {
    dataset
        .segments()
        .par_iter()
        .map(|s| featurize_segment(s, config))
        .collect()
}

pub fn features_csv(rows: &[FeatureRow]) -> String {
    let mut out = String::from("participant,task,level");
    for f in Feature::ALL {
        out.push(',');
        out.push_str(f.name());
    }
    out.push_str(",task_score\n");
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in rows {
        out.push_str(&format!("{},{},{}", r.participant_id, r.task, r.level));
        for f in Feature::ALL {
            out.push(',');
            out.push_str(&cell(r.features.get(f)));
        }
        out.push(',');
        out.push_str(&cell(r.task_score));
        out.push('\n');
    }
    out
}
