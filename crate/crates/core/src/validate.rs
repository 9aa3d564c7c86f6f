//! Segment invariant checks. Issues are data, never failures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, EventKind, LoadLevel, PupilSample, SessionSegment, TaskKind};

pub const MIN_DURATION_S: f64 = 60.0;
pub const MAX_DURATION_S: f64 = 300.0;
pub const MIN_RR_COUNT: usize = 30;
pub const MAX_PUPIL_GAP_FRACTION: f64 = 0.25;
/// Pupil samples below this confidence are treated as gaps.
pub const PUPIL_CONFIDENCE_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl Issue {
    fn error(message: impl Into<String>) -> Self {
        Issue {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Issue {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

pub fn has_errors(issues: &[Issue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

/// Fraction of samples whose confidence is below
/// [`PUPIL_CONFIDENCE_THRESHOLD`]. Empty input counts as all gap.
pub fn pupil_gap_fraction(samples: &[PupilSample]) -> f64 {
    if samples.is_empty() {
        return 1.0;
    }
    let gaps = samples
        .iter()
        .filter(|s| !(s.confidence >= PUPIL_CONFIDENCE_THRESHOLD))
        .count();
    gaps as f64 / samples.len() as f64
}

fn strictly_increasing<I: IntoIterator<Item = f64>>(times: I) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for t in times {
        if !(t > prev) {
            return false;
        }
        prev = t;
    }
    true
}

fn times_in_range<I: IntoIterator<Item = f64>>(times: I, duration: f64) -> bool {
    times.into_iter().all(|t| t >= 0.0 && t <= duration)
}

/// Checks every segment invariant. Returns an empty list iff all hold.
pub fn validate_segment(seg: &SessionSegment) -> Vec<Issue> {
    let mut issues = Vec::new();
    let d = seg.duration_s;

    if seg.participant_id.is_empty() {
        issues.push(Issue::error("empty participant id"));
    }
    if !(MIN_DURATION_S..=MAX_DURATION_S).contains(&d) {
        issues.push(Issue::error(format!(
            "duration {d} s outside [{MIN_DURATION_S}, {MAX_DURATION_S}]"
        )));
    }

    // RR
    if seg.rr_intervals.iter().any(|r| !(r.rr_ms > 0.0) || !r.rr_ms.is_finite()) {
        issues.push(Issue::error("non-positive RR interval"));
    }
    if !strictly_increasing(seg.rr_intervals.iter().map(|r| r.t_s)) {
        issues.push(Issue::error("RR timestamps not strictly increasing"));
    }
    if !times_in_range(seg.rr_intervals.iter().map(|r| r.t_s), d) {
        issues.push(Issue::error("RR timestamp outside segment"));
    }
    if seg.rr_intervals.len() < MIN_RR_COUNT {
        issues.push(Issue::warning(format!(
            "only {} RR intervals (< {MIN_RR_COUNT})",
            seg.rr_intervals.len()
        )));
    }

    // Pupil
    for (eye, samples) in [("pupil_left", &seg.pupil_left), ("pupil_right", &seg.pupil_right)] {
        if samples.is_empty() {
            issues.push(Issue::warning(format!("{eye} has no samples")));
            continue;
        }
        if !strictly_increasing(samples.iter().map(|s| s.t_s)) {
            issues.push(Issue::error(format!("{eye} timestamps not strictly increasing")));
        }
        if !times_in_range(samples.iter().map(|s| s.t_s), d) {
            issues.push(Issue::error(format!("{eye} timestamp outside segment")));
        }
        if samples.iter().any(|s| !(0.0..=1.0).contains(&s.confidence)) {
            issues.push(Issue::error(format!("{eye} confidence outside [0, 1]")));
        }
        if samples
            .iter()
            .any(|s| s.confidence > 0.0 && !(s.diameter_mm > 0.0 && s.diameter_mm.is_finite()))
        {
            issues.push(Issue::error(format!("{eye} non-positive diameter with confidence > 0")));
        }
        let gap = pupil_gap_fraction(samples);
        if gap > MAX_PUPIL_GAP_FRACTION {
            issues.push(Issue::warning(format!(
                "{eye}: pupil gap fraction {gap:.2} > {MAX_PUPIL_GAP_FRACTION:.2}"
            )));
        }
    }

    // Driving
    if !seg.driving.is_empty() {
        if !strictly_increasing(seg.driving.iter().map(|s| s.t_s)) {
            issues.push(Issue::error("driving timestamps not strictly increasing"));
        }
        if !times_in_range(seg.driving.iter().map(|s| s.t_s), d) {
            issues.push(Issue::error("driving timestamp outside segment"));
        }
        if seg.driving.iter().any(|s| !s.lateral_position_m.is_finite()) {
            issues.push(Issue::error("non-finite lateral position"));
        }
    }

    // Events
    if seg
        .events
        .windows(2)
        .any(|w| !(w[1].t_s >= w[0].t_s))
    {
        issues.push(Issue::error("event timestamps decreasing"));
    }
    if !times_in_range(seg.events.iter().map(|e| e.t_s), d) {
        issues.push(Issue::error("event timestamp outside segment"));
    }
    let first_onset = seg
        .events
        .iter()
        .find(|e| e.kind == EventKind::StimulusOnset)
        .map(|e| e.t_s);
    let orphan = seg.events.iter().any(|e| {
        e.kind == EventKind::Response && first_onset.is_none_or(|t0| e.t_s < t0)
    });
    if orphan {
        issues.push(Issue::error("response without a preceding stimulus onset"));
    }

    issues
}

/// Dataset-level checks: participants with some but not all n-back levels.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (pid, idx) in dataset.participants() {
        let nback: Vec<LoadLevel> = idx
            .iter()
            .map(|&i| &dataset.segments()[i])
            .filter(|s| s.task == TaskKind::NBack)
            .map(|s| s.level)
            .collect();
        if !nback.is_empty() && nback.len() < LoadLevel::ALL.len() {
            issues.push(Issue::warning(format!(
                "participant {pid} has {} of 3 n-back levels",
                nback.len()
            )));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RrSample, TaskEvent};

    fn good_segment() -> SessionSegment {
        let mut seg = SessionSegment::empty("p01", TaskKind::NBack, LoadLevel::Easy, 120.0);
        seg.rr_intervals = (1..=100)
            .map(|i| RrSample {
                t_s: i as f64,
                rr_ms: 1000.0,
            })
            .collect();
        let pupil: Vec<PupilSample> = (0..1200)
            .map(|i| PupilSample {
                t_s: i as f64 * 0.1,
                diameter_mm: 4.0,
                confidence: 0.9,
            })
            .collect();
        seg.pupil_left = pupil.clone();
        seg.pupil_right = pupil;
        seg.events = vec![
            TaskEvent::new(1.0, EventKind::StimulusOnset),
            TaskEvent::new(1.0, EventKind::TargetPresent),
            TaskEvent::new(1.5, EventKind::Response),
        ];
        seg
    }

    #[test]
    fn clean_segment_has_no_issues() {
        assert!(validate_segment(&good_segment()).is_empty());
    }

    #[test]
    fn negative_rr_is_one_error() {
        let mut seg = good_segment();
        seg.rr_intervals[3].rr_ms = -5.0;
        let issues = validate_segment(&seg);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Error);
        assert_eq!(issues[0].message, "non-positive RR interval");
    }

    #[test]
    fn pupil_gap_warning() {
        let mut seg = good_segment();
        // 40% of samples at confidence 0, counted independently below
        for (i, s) in seg.pupil_left.iter_mut().enumerate() {
            if i % 5 < 2 {
                s.confidence = 0.0;
            }
        }
        let brute = seg.pupil_left.iter().filter(|s| s.confidence < 0.6).count() as f64
            / seg.pupil_left.len() as f64;
        assert_eq!(brute, 0.4);
        let issues = validate_segment(&seg);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
        assert!(issues[0].message.contains("pupil gap fraction 0.40 > 0.25"), "{}", issues[0]);
    }

    #[test]
    fn too_few_beats_warns() {
        let mut seg = good_segment();
        seg.rr_intervals.truncate(10);
        let issues = validate_segment(&seg);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
    }

    #[test]
    fn non_monotone_and_out_of_range() {
        let mut seg = good_segment();
        seg.rr_intervals.swap(1, 2);
        seg.duration_s = 30.0;
        let issues = validate_segment(&seg);
        assert!(has_errors(&issues));
        assert!(issues.iter().any(|i| i.message.contains("strictly increasing")));
        assert!(issues.iter().any(|i| i.message.contains("duration")));
    }

    #[test]
    fn orphan_response() {
        let mut seg = good_segment();
        seg.events.insert(0, TaskEvent::new(0.5, EventKind::Response));
        let issues = validate_segment(&seg);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.contains("response"));
    }

    #[test]
    fn validation_is_pure() {
        let mut seg = good_segment();
        seg.rr_intervals[0].rr_ms = 0.0;
        assert_eq!(validate_segment(&seg), validate_segment(&seg));
    }
}
