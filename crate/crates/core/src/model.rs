//! Domain types shared by every stage of the pipeline.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Secondary task performed while driving.
///
/// N-back segments carry mental-workload labels, visual-search segments
/// carry perceptual-load labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    NBack,
    VisualSearch,
}

impl TaskKind {
    pub const ALL: [TaskKind; 2] = [TaskKind::NBack, TaskKind::VisualSearch];

    /// Name used in manifests, directory names and CLI flags.
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::NBack => "nback",
            TaskKind::VisualSearch => "visual_search",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            TaskKind::NBack => "N-Back",
            TaskKind::VisualSearch => "Visual Search",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nback" => Ok(TaskKind::NBack),
            "visual_search" => Ok(TaskKind::VisualSearch),
            other => Err(Error::input(format!(
                "unknown task {other:?} (expected nback or visual_search)"
            ))),
        }
    }
}

/// Difficulty level of a segment. Ordered `Easy < Medium < Hard`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadLevel {
    Easy,
    Medium,
    Hard,
}

impl LoadLevel {
    pub const ALL: [LoadLevel; 3] = [LoadLevel::Easy, LoadLevel::Medium, LoadLevel::Hard];

    pub fn code(self) -> u8 {
        match self {
            LoadLevel::Easy => 0,
            LoadLevel::Medium => 1,
            LoadLevel::Hard => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LoadLevel::Easy),
            1 => Some(LoadLevel::Medium),
            2 => Some(LoadLevel::Hard),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LoadLevel::Easy => "easy",
            LoadLevel::Medium => "medium",
            LoadLevel::Hard => "hard",
        }
    }
}

impl fmt::Display for LoadLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoadLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(LoadLevel::Easy),
            "medium" => Ok(LoadLevel::Medium),
            "hard" => Ok(LoadLevel::Hard),
            other => Err(Error::input(format!(
                "unknown level {other:?} (expected easy, medium or hard)"
            ))),
        }
    }
}

/// One RR interval, stamped with the time of the beat that closes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrSample {
    pub t_s: f64,
    pub rr_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilSample {
    pub t_s: f64,
    pub diameter_mm: f64,
    pub confidence: f64,
}

/// Lateral position of the vehicle. `target_lane` is the lane the driver is
/// instructed to be in at that moment (lane `k` has its center at
/// `k * lane_width` meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingSample {
    pub t_s: f64,
    pub lateral_position_m: f64,
    pub target_lane: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    StimulusOnset,
    Response,
    TargetPresent,
    TargetAbsent,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::StimulusOnset => "stimulus_onset",
            EventKind::Response => "response",
            EventKind::TargetPresent => "target_present",
            EventKind::TargetAbsent => "target_absent",
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stimulus_onset" => Ok(EventKind::StimulusOnset),
            "response" => Ok(EventKind::Response),
            "target_present" => Ok(EventKind::TargetPresent),
            "target_absent" => Ok(EventKind::TargetAbsent),
            other => Err(Error::input(format!("unknown event kind {other:?}"))),
        }
    }
}

/// Target markers share the timestamp of the stimulus they describe, so
/// event times are non-decreasing rather than strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEvent {
    pub t_s: f64,
    pub kind: EventKind,
    pub payload: Option<String>,
}

impl TaskEvent {
    pub fn new(t_s: f64, kind: EventKind) -> Self {
        TaskEvent {
            t_s,
            kind,
            payload: None,
        }
    }

    pub fn with_payload(t_s: f64, kind: EventKind, payload: impl Into<String>) -> Self {
        TaskEvent {
            t_s,
            kind,
            payload: Some(payload.into()),
        }
    }
}

/// One participant x task x difficulty recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSegment {
    pub participant_id: String,
    pub task: TaskKind,
    pub level: LoadLevel,
    pub duration_s: f64,
    pub rr_intervals: Vec<RrSample>,
    pub pupil_left: Vec<PupilSample>,
    pub pupil_right: Vec<PupilSample>,
    pub driving: Vec<DrivingSample>,
    pub events: Vec<TaskEvent>,
}

impl SessionSegment {
    pub fn empty(participant_id: impl Into<String>, task: TaskKind, level: LoadLevel, duration_s: f64) -> Self {
        SessionSegment {
            participant_id: participant_id.into(),
            task,
            level,
            duration_s,
            rr_intervals: Vec::new(),
            pupil_left: Vec::new(),
            pupil_right: Vec::new(),
            driving: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn key(&self) -> SegmentKey {
        SegmentKey {
            participant_id: self.participant_id.clone(),
            task: self.task,
            level: self.level,
        }
    }

    /// `participant/task_level`, used in messages.
    pub fn label(&self) -> String {
        format!("{}/{}_{}", self.participant_id, self.task, self.level)
    }

    pub fn rr_ms(&self) -> Vec<f64> {
        self.rr_intervals.iter().map(|s| s.rr_ms).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentKey {
    pub participant_id: String,
    pub task: TaskKind,
    pub level: LoadLevel,
}

/// Segments grouped by participant. Segments are kept sorted by
/// `(participant, task, level)` and each triple appears at most once.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    segments: Vec<SessionSegment>,
}

impl Dataset {
    pub fn new(mut segments: Vec<SessionSegment>) -> Result<Self> {
        segments.sort_by_key(|s| s.key());
        for pair in segments.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::input(format!(
                    "duplicate segment {}",
                    pair[1].label()
                )));
            }
        }
        Ok(Dataset { segments })
    }

    pub fn segments(&self) -> &[SessionSegment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<SessionSegment> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Participant id -> indices into [`Dataset::segments`].
    pub fn participants(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut index: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, seg) in self.segments.iter().enumerate() {
            index.entry(seg.participant_id.as_str()).or_default().push(i);
        }
        index
    }

    pub fn participant_ids(&self) -> Vec<String> {
        self.participants().keys().map(|s| s.to_string()).collect()
    }
}

/// The eight model input features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    HrMean,
    HrMin,
    HrMax,
    HrStd,
    HrvRmssd,
    LhipaLeft,
    LhipaRight,
    DriveAvgDev,
}

pub const FEATURE_COUNT: usize = 8;

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::HrMean,
        Feature::HrMin,
        Feature::HrMax,
        Feature::HrStd,
        Feature::HrvRmssd,
        Feature::LhipaLeft,
        Feature::LhipaRight,
        Feature::DriveAvgDev,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::HrMean => "hr_mean",
            Feature::HrMin => "hr_min",
            Feature::HrMax => "hr_max",
            Feature::HrStd => "hr_std",
            Feature::HrvRmssd => "hrv_rmssd",
            Feature::LhipaLeft => "lhipa_left",
            Feature::LhipaRight => "lhipa_right",
            Feature::DriveAvgDev => "drive_avg_dev",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Per-segment feature values; `None` marks a channel that could not be
/// computed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    values: [Option<f64>; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> Option<f64> {
        self.values[feature.index()]
    }

    /// Stores `value`; non-finite values are recorded as missing.
    pub fn set(&mut self, feature: Feature, value: Option<f64>) {
        self.values[feature.index()] = value.filter(|v| v.is_finite());
    }

    pub fn values(&self) -> &[Option<f64>; FEATURE_COUNT] {
        &self.values
    }

    pub fn missing(&self) -> Vec<Feature> {
        Feature::ALL
            .into_iter()
            .filter(|f| self.get(*f).is_none())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}

/// Features of one segment together with its identity and the
/// secondary-task score (n-back rate, or visual-search mean reaction time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub participant_id: String,
    pub task: TaskKind,
    pub level: LoadLevel,
    pub features: FeatureVector,
    pub task_score: Option<f64>,
}
