//! Raw channel synthesis for one segment.
//!
//! Every value is rounded to a fixed number of decimals before it is
//! stored, so a dataset written to disk and read back is identical to the
//! one held in memory.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::driving::{build_ideal_path, LaneChange, DEFAULT_LANE_WIDTH_M, DEFAULT_SPEED_MPS, DEFAULT_TRANSITION_M};
use crate::model::{DrivingSample, EventKind, PupilSample, RrSample, TaskEvent};

pub(crate) fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

/// RR intervals whose instantaneous heart rate averages `hr_bpm` and whose
/// successive differences have RMS `rmssd_ms`. Intervals are independent
/// Gaussians with sd `rmssd / sqrt(2)`; the mean interval is raised to
/// cancel the upward bias of `mean(60000 / rr)`.
pub fn synth_rr<R: Rng>(rng: &mut R, duration_s: f64, hr_bpm: f64, rmssd_ms: f64) -> Vec<RrSample> {
    let sigma = rmssd_ms / std::f64::consts::SQRT_2;
    let base = 60_000.0 / hr_bpm;
    let mut mu = base;
    for _ in 0..4 {
        mu = base * (1.0 + (sigma / mu).powi(2));
    }
    let noise = Normal::new(0.0, sigma).expect("finite sd");
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        let rr = round_to((mu + noise.sample(rng)).clamp(320.0, 1950.0), 3);
        let next = round_to(t + rr / 1000.0, 6);
        if next > duration_s {
            break;
        }
        t = next;
        out.push(RrSample { t_s: t, rr_ms: rr });
    }
    out
}

pub const PUPIL_BLOCK_S: f64 = 2.0;
const BURST_PERIOD: usize = 32;
const BURST_FLOOR: f64 = 0.01;
const TONE_MM: f64 = 0.4;
// as fractions of the sampling rate
const TONE_LOW: f64 = 7.46 / 120.0;
const TONE_HIGH: f64 = 59.9 / 120.0;
pub const PUPIL_NOISE_MM: f64 = 0.02;

/// Pupil diameter as a slow oscillation plus white noise, shaped by
/// `control` in [-1, 1].
///
/// A positive control turns that fraction of 2-s blocks into square-wave
/// noise bursts, which raises LHIPA. A negative control damps the noise
/// and mixes in two small tones just below the band edges of the first
/// and fourth detail levels. Both alias to very slow coefficient
/// sequences, so the band ratio has fewer local maxima and LHIPA drops.
/// Tone frequencies scale with `rate_hz`.
pub fn synth_pupil<R: Rng>(rng: &mut R, duration_s: f64, rate_hz: f64, control: f64, mean_mm: f64) -> Vec<PupilSample> {
    let n = (duration_s * rate_hz).floor() as usize + 1;
    let freq = rng.random_range(0.1..0.5);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let amp = rng.random_range(0.1..0.3);
    let block = (PUPIL_BLOCK_S * rate_hz).round() as usize;
    let n_blocks = n.div_ceil(block);
    let picked = ((control.clamp(0.0, 1.0)) * n_blocks as f64).round() as usize;
    let mut special = vec![false; n_blocks];
    for i in sample(rng, n_blocks, picked).iter() {
        special[i] = true;
    }
    let quiet = (-control).clamp(0.0, 1.0);
    let tone = TONE_MM * quiet;
    let (p1, p2) = (rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.0..std::f64::consts::TAU));
    (0..n)
        .map(|k| {
            let t = k as f64 / rate_hz;
            let b = k / block;
            let envelope = if control > 0.0 && special[b] && k % BURST_PERIOD >= BURST_PERIOD / 2 {
                BURST_FLOOR
            } else {
                1.0 - 0.9 * quiet
            };
            let z: f64 = StandardNormal.sample(rng);
            let tau = std::f64::consts::TAU;
            let tones = tone * ((tau * TONE_LOW * rate_hz * t + p1).sin() + (tau * TONE_HIGH * rate_hz * t + p2).sin());
            let d = mean_mm + amp * (tau * freq * t + phase).sin() + tones + PUPIL_NOISE_MM * envelope * z;
            PupilSample {
                t_s: round_to(t, 5),
                diameter_mm: round_to(d, 5),
                confidence: round_to(rng.random_range(0.85..1.0), 3),
            }
        })
        .filter(|s| s.t_s <= duration_s)
        .collect()
}

pub const DRIVING_RATE_HZ: f64 = 33.0;
const AR_COEF: f64 = 0.95;

/// Lane-change trace: the ideal path plus AR(1) lateral noise whose mean
/// absolute value is `mean_abs_dev_m`. Lane changes are on the sample grid,
/// between 6 and 12 s apart.
pub fn synth_driving<R: Rng>(rng: &mut R, duration_s: f64, mean_abs_dev_m: f64) -> Vec<DrivingSample> {
    let n = (duration_s * DRIVING_RATE_HZ).floor() as usize + 1;
    let mut lane: u8 = 1;
    let mut lanes = Vec::with_capacity(n);
    let mut changes = Vec::new();
    let mut next_change = (rng.random_range(6.0..12.0) * DRIVING_RATE_HZ) as usize;
    for k in 0..n {
        if k == next_change {
            let to = match lane {
                0 => rng.random_range(1..=2),
                2 => rng.random_range(0..=1),
                _ => {
                    if rng.random_bool(0.5) {
                        0
                    } else {
                        2
                    }
                }
            };
            changes.push(LaneChange {
                s: k as f64 / DRIVING_RATE_HZ * DEFAULT_SPEED_MPS,
                from_lane: lane,
                to_lane: to,
            });
            lane = to;
            next_change = k + (rng.random_range(6.0..12.0) * DRIVING_RATE_HZ) as usize;
        }
        lanes.push(lane);
    }
    let path = build_ideal_path(1, &changes, DEFAULT_LANE_WIDTH_M, DEFAULT_TRANSITION_M)
        .expect("changes are spaced beyond the transition length");
    let sd = mean_abs_dev_m * (std::f64::consts::PI / 2.0).sqrt();
    let innovation = Normal::new(0.0, sd * (1.0 - AR_COEF * AR_COEF).sqrt()).expect("finite sd");
    let mut e = Normal::new(0.0, sd).expect("finite sd").sample(rng);
    (0..n)
        .map(|k| {
            if k > 0 {
                e = AR_COEF * e + innovation.sample(rng);
            }
            let t = k as f64 / DRIVING_RATE_HZ;
            DrivingSample {
                t_s: round_to(t, 6),
                lateral_position_m: round_to(path.offset_at(t * DEFAULT_SPEED_MPS) + e, 5),
                target_lane: lanes[k],
            }
        })
        .collect()
}

pub const NBACK_PRESENTATIONS: usize = 40;
pub const NBACK_TARGETS: usize = 10;
const LETTERS: &[u8] = b"BCDFGHKLMPRSTVXZ";

/// N-back log: 40 evenly spaced letters with exactly 10 targets, a letter
/// matching the one `n` positions back. Hits and false alarms are drawn so
/// the expected rate `(hits - fp) / targets` equals `rate`.
pub fn synth_nback_events<R: Rng>(rng: &mut R, duration_s: f64, n: usize, rate: f64) -> Vec<TaskEvent> {
    let spacing = round_to(duration_s / NBACK_PRESENTATIONS as f64, 3);
    let eligible = NBACK_PRESENTATIONS - n;
    let targets: Vec<usize> = sample(rng, eligible, NBACK_TARGETS).iter().map(|i| i + n).collect();
    let rate = rate.clamp(-1.0, 1.0);
    let p_fa = (0.02 + 0.1 * (1.0 - rate)).min(0.3);
    let non_targets = (NBACK_PRESENTATIONS - NBACK_TARGETS) as f64;
    let p_hit = (rate + non_targets * p_fa / NBACK_TARGETS as f64).clamp(0.0, 1.0);

    let mut letters: Vec<u8> = Vec::with_capacity(NBACK_PRESENTATIONS);
    let mut events = Vec::new();
    for i in 0..NBACK_PRESENTATIONS {
        let is_target = targets.contains(&i);
        let letter = if is_target {
            letters[i - n]
        } else {
            loop {
                let c = LETTERS[rng.random_range(0..LETTERS.len())];
                if i < n || c != letters[i - n] {
                    break c;
                }
            }
        };
        letters.push(letter);
        let onset = round_to(i as f64 * spacing, 3);
        events.push(TaskEvent::with_payload(onset, EventKind::StimulusOnset, (letter as char).to_string()));
        events.push(TaskEvent::new(
            onset,
            if is_target {
                EventKind::TargetPresent
            } else {
                EventKind::TargetAbsent
            },
        ));
        let respond = rng.random_bool(if is_target { p_hit } else { p_fa });
        if respond {
            let rt = rng.random_range(0.35..(spacing - 0.1).min(1.6));
            events.push(TaskEvent::new(round_to(onset + rt, 3), EventKind::Response));
        }
    }
    events
}

pub const SEARCH_ARRAYS: usize = 40;
pub const SEARCH_SPACING_S: f64 = 3.0;
const SEARCH_MISS_RATE: f64 = 0.05;

/// Visual-search log: 40 arrays 3 s apart, half with the target. Present
/// targets are answered (with a small miss rate) after a Gaussian reaction
/// time around `rt_mean_s`.
pub fn synth_search_events<R: Rng>(rng: &mut R, rt_mean_s: f64, rt_sd_s: f64) -> Vec<TaskEvent> {
    let targets: Vec<usize> = sample(rng, SEARCH_ARRAYS, SEARCH_ARRAYS / 2).into_vec();
    let rt = Normal::new(rt_mean_s, rt_sd_s.max(0.0)).expect("finite sd");
    let mut events = Vec::new();
    for i in 0..SEARCH_ARRAYS {
        let onset = i as f64 * SEARCH_SPACING_S;
        let present = targets.contains(&i);
        events.push(TaskEvent::with_payload(onset, EventKind::StimulusOnset, format!("array{i}")));
        events.push(TaskEvent::new(
            onset,
            if present {
                EventKind::TargetPresent
            } else {
                EventKind::TargetAbsent
            },
        ));
        if present && !rng.random_bool(SEARCH_MISS_RATE) {
            let r = rt.sample(rng).clamp(0.3, 2.9);
            events.push(TaskEvent::new(round_to(onset + r, 3), EventKind::Response));
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cardiac::{cardiac_features, RrPolicy};
    use crate::driving::{drive_avg_dev, DrivingConfig};
    use crate::task::{nback_counts, visual_search_perf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rr_hits_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hr = 0.0;
        let mut rm = 0.0;
        for _ in 0..20 {
            let rr: Vec<f64> = synth_rr(&mut rng, 140.0, 80.0, 35.0).iter().map(|s| s.rr_ms).collect();
            let f = cardiac_features(&rr, &RrPolicy::default()).unwrap();
            hr += f.hr_mean / 20.0;
            rm += f.rmssd.unwrap() / 20.0;
        }
        assert!((hr - 80.0).abs() < 0.5, "{hr}");
        assert!((rm - 35.0).abs() < 1.5, "{rm}");
    }

    #[test]
    fn driving_deviation_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut mean = 0.0;
        for _ in 0..20 {
            let tr = synth_driving(&mut rng, 140.0, 0.2);
            mean += drive_avg_dev(&tr, &DrivingConfig::default()).unwrap() / 20.0;
        }
        assert!((mean - 0.2).abs() < 0.02, "{mean}");
    }

    #[test]
    fn nback_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let ev = synth_nback_events(&mut rng, 130.0, n, 1.0);
            let c = nback_counts(&ev);
            assert_eq!(c.targets, 10);
            let onsets: Vec<&TaskEvent> = ev.iter().filter(|e| e.kind == EventKind::StimulusOnset).collect();
            assert_eq!(onsets.len(), 40);
            // targets repeat the letter n positions back
            let marks: Vec<bool> = ev
                .iter()
                .filter(|e| matches!(e.kind, EventKind::TargetPresent | EventKind::TargetAbsent))
                .map(|e| e.kind == EventKind::TargetPresent)
                .collect();
            for i in n..40 {
                assert_eq!(marks[i], onsets[i].payload == onsets[i - n].payload);
            }
        }
    }

    #[test]
    fn search_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ev = synth_search_events(&mut rng, 1.3, 0.2);
        let p = visual_search_perf(&ev).unwrap();
        assert_eq!(p.stimuli, 40);
        assert!((p.mean_rt_s.unwrap() - 1.3).abs() < 0.15);
        assert!(p.accuracy >= 0.8);
    }
}
