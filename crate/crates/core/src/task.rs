//! Secondary-task performance scores from event logs.
//!
//! A response belongs to the most recent stimulus onset before it, so each
//! stimulus owns the window from its onset to the next onset. Target markers
//! annotate the most recent onset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventKind, TaskEvent};

/// Presentation time plus pause of one visual-search array.
pub const VISUAL_SEARCH_WINDOW_S: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
struct Stimulus {
    onset: f64,
    target: Option<bool>,
    responses: Vec<f64>,
}

fn stimuli(events: &[TaskEvent]) -> Vec<Stimulus> {
    let mut out: Vec<Stimulus> = Vec::new();
    for e in events {
        match e.kind {
            EventKind::StimulusOnset => out.push(Stimulus {
                onset: e.t_s,
                target: None,
                responses: Vec::new(),
            }),
            EventKind::TargetPresent | EventKind::TargetAbsent => {
                if let Some(s) = out.last_mut() {
                    s.target = Some(e.kind == EventKind::TargetPresent);
                }
            }
            EventKind::Response => {
                if let Some(s) = out.last_mut() {
                    s.responses.push(e.t_s);
                }
            }
        }
    }
    out
}

/// Hit and false-positive counts of an n-back block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NBackCounts {
    pub targets: usize,
    pub hits: usize,
    pub false_positives: usize,
}

/// Unmarked stimuli count as non-targets.
pub fn nback_counts(events: &[TaskEvent]) -> NBackCounts {
    let mut c = NBackCounts {
        targets: 0,
        hits: 0,
        false_positives: 0,
    };
    for s in stimuli(events) {
        let target = s.target.unwrap_or(false);
        let responded = !s.responses.is_empty();
        if target {
            c.targets += 1;
            if responded {
                c.hits += 1;
            }
        } else if responded {
            c.false_positives += 1;
        }
    }
    c
}

/// `(hits - false_positives) / targets`.
pub fn nback_rate(events: &[TaskEvent]) -> Result<f64> {
    let c = nback_counts(events);
    if c.targets == 0 {
        return Err(Error::input("n-back block has no targets"));
    }
    Ok((c.hits as f64 - c.false_positives as f64) / c.targets as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisualSearchPerf {
    /// Mean reaction time over answered arrays; `None` without responses.
    pub mean_rt_s: Option<f64>,
    pub accuracy: f64,
    pub stimuli: usize,
}

/// Reaction time and accuracy of a visual-search block.
///
/// Only the first response within 3 s of an onset (and before the next
/// onset) counts. A response is expected exactly when the target is
/// present; arrays without a marker count as target-present.
pub fn visual_search_perf(events: &[TaskEvent]) -> Result<VisualSearchPerf> {
    let stims = stimuli(events);
    if stims.is_empty() {
        return Err(Error::input("visual-search block has no stimuli"));
    }
    let mut rts = Vec::new();
    let mut correct = 0usize;
    for s in &stims {
        let first = s
            .responses
            .iter()
            .copied()
            .find(|&t| t - s.onset <= VISUAL_SEARCH_WINDOW_S);
        if let Some(t) = first {
            rts.push(t - s.onset);
        }
        if first.is_some() == s.target.unwrap_or(true) {
            correct += 1;
        }
    }
    Ok(VisualSearchPerf {
        mean_rt_s: if rts.is_empty() {
            None
        } else {
            Some(rts.iter().sum::<f64>() / rts.len() as f64)
        },
        accuracy: correct as f64 / stims.len() as f64,
        stimuli: stims.len(),
    })
}
