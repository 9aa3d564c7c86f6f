//! Deterministic synthetic sessions.
//!
//! Each participant gets a baseline offset per dimension; each segment adds
//! the configured level mean and within-participant noise, then raw
//! channels are synthesized to hit the resulting targets. Participant `i`
//! draws only from its own stream, so output does not depend on thread
//! scheduling.

mod config;
mod signals;

pub use config::{BaselineShares, GeneratorConfig, LevelParams, MeanSd, DEFAULT_PARTICIPANTS};
pub use signals::{synth_driving, synth_nback_events, synth_pupil, synth_rr, synth_search_events};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Dataset, LoadLevel, SessionSegment, TaskKind};
use crate::rng;
use signals::round_to;

/// Measured mean LHIPA (Hz) of `synth_pupil` at 120 Hz over 120-160 s,
/// by control value (80 signals per row). Monotone in both columns.
/// Per-signal sd around each row is about 0.05 to 0.09.
const LHIPA_CALIBRATION: &[(f64, f64)] = &[
    (-1.0, 0.1864),
    (-0.9, 0.3062),
    (-0.8, 0.471),
    (-0.7, 0.6506),
    (-0.6, 0.9375),
    (-0.55, 1.0942),
    (-0.5, 1.3102),
    (-0.45, 1.5073),
    (-0.4, 1.7235),
    (-0.35, 1.9032),
    (-0.3, 2.0772),
    (-0.25, 2.2285),
    (-0.2, 2.3259),
    (-0.15, 2.3891),
    (-0.1, 2.4304),
    (0.0, 2.4558),
    (0.1, 2.5193),
    (0.2, 2.5824),
    (0.3, 2.6386),
    (0.4, 2.6884),
    (0.5, 2.7439),
    (0.6, 2.8243),
    (0.7, 2.8965),
    (0.8, 2.9446),
    (0.9, 3.024),
    (1.0, 3.0947),
];

/// Control value whose expected LHIPA is `target`, by linear
/// interpolation in the calibration table. Targets beyond the table are
/// clamped to its ends.
pub fn pupil_control_for(target: f64) -> f64 {
    let t = LHIPA_CALIBRATION;
    if target <= t[0].1 {
        return t[0].0;
    }
    for w in t.windows(2) {
        let ((u0, l0), (u1, l1)) = (w[0], w[1]);
        if target <= l1 {
            return u0 + (u1 - u0) * (target - l0) / (l1 - l0);
        }
    }
    t[t.len() - 1].0
}

fn n_back(level: LoadLevel) -> usize {
    level.code() as usize + 1
}

struct Offsets {
    hr: f64,
    rmssd: f64,
    lhipa_right: f64,
    lhipa_left: f64,
    drive: f64,
}

fn normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd.max(0.0)).expect("finite sd").sample(rng)
}

/// Smallest configured sd of one dimension over the six conditions.
fn min_sd(cfg: &GeneratorConfig, pick: fn(&LevelParams) -> MeanSd) -> f64 {
    cfg.levels
        .iter()
        .flatten()
        .map(|p| pick(p).sd)
        .fold(f64::INFINITY, f64::min)
}

struct Split {
    baseline_sd: f64,
    pick: fn(&LevelParams) -> MeanSd,
}

impl Split {
    fn new(cfg: &GeneratorConfig, share: f64, pick: fn(&LevelParams) -> MeanSd) -> Split {
        Split {
            baseline_sd: share.sqrt() * min_sd(cfg, pick),
            pick,
        }
    }

    fn within_sd(&self, p: &LevelParams) -> f64 {
        let sd = (self.pick)(p).sd;
        (sd * sd - self.baseline_sd * self.baseline_sd).max(0.0).sqrt()
    }

    fn draw<R: Rng>(&self, rng: &mut R, p: &LevelParams, offset: f64) -> f64 {
        normal(rng, (self.pick)(p).mean + offset, self.within_sd(p))
    }
}

struct Splits {
    hr: Split,
    rmssd: Split,
    lhipa_right: Split,
    lhipa_left: Split,
    drive: Split,
}

impl Splits {
    fn new(cfg: &GeneratorConfig) -> Splits {
        let s = cfg.baseline_share;
        Splits {
            hr: Split::new(cfg, s.hr, |p| p.hr_bpm),
            rmssd: Split::new(cfg, s.rmssd, |p| p.rmssd_ms),
            lhipa_right: Split::new(cfg, s.lhipa_right, |p| p.lhipa_right),
            lhipa_left: Split::new(cfg, s.lhipa_left, |p| p.lhipa_left),
            drive: Split::new(cfg, s.drive, |p| p.drive_dev_m),
        }
    }
}

pub fn participant_id(index: usize, n_participants: usize) -> String {
    let width = n_participants.to_string().len().max(2);
    format!("P{:0width$}", index + 1)
}

fn generate_participant(cfg: &GeneratorConfig, splits: &Splits, index: usize) -> Vec<SessionSegment> {
    let root = rng::derive_seed(cfg.seed, "participant", index as u64);
    let mut prng = rng::stream(root, "baseline", 0);
    let offsets = Offsets {
        hr: normal(&mut prng, 0.0, splits.hr.baseline_sd),
        rmssd: normal(&mut prng, 0.0, splits.rmssd.baseline_sd),
        lhipa_right: normal(&mut prng, 0.0, splits.lhipa_right.baseline_sd),
        lhipa_left: normal(&mut prng, 0.0, splits.lhipa_left.baseline_sd),
        drive: normal(&mut prng, 0.0, splits.drive.baseline_sd),
    };
    let pupil_mean = prng.random_range(3.0..5.0);
    let id = participant_id(index, cfg.n_participants);

    let mut segments = Vec::with_capacity(6);
    for (t, task) in TaskKind::ALL.into_iter().enumerate() {
        for level in LoadLevel::ALL {
            let p = cfg.level(task, level);
            let mut r = rng::stream(root, "segment", (t * 3 + level.code() as usize) as u64);
            let duration = round_to(r.random_range(cfg.duration_min_s..=cfg.duration_max_s), 3);
            let hr = splits.hr.draw(&mut r, p, offsets.hr).clamp(45.0, 150.0);
            let rmssd = splits.rmssd.draw(&mut r, p, offsets.rmssd).clamp(3.0, 0.15 * 60_000.0 / hr);
            let right = splits.lhipa_right.draw(&mut r, p, offsets.lhipa_right);
            let left = splits.lhipa_left.draw(&mut r, p, offsets.lhipa_left);
            let drive = splits.drive.draw(&mut r, p, offsets.drive).max(0.02);
            let score = normal(&mut r, p.score.mean, p.score.sd);

            let mut seg = SessionSegment::empty(id.clone(), task, level, duration);
            seg.rr_intervals = synth_rr(&mut rng::stream(root, "rr", t as u64 * 3 + level.code() as u64), duration, hr, rmssd);
            let eye_seed = |eye: u64| rng::stream(root, "pupil", (t as u64 * 3 + level.code() as u64) * 2 + eye);
            seg.pupil_left = synth_pupil(&mut eye_seed(0), duration, cfg.pupil_rate_hz, pupil_control_for(left), pupil_mean);
            seg.pupil_right = synth_pupil(&mut eye_seed(1), duration, cfg.pupil_rate_hz, pupil_control_for(right), pupil_mean);
            let mut er = rng::stream(root, "task", t as u64 * 3 + level.code() as u64);
            seg.driving = synth_driving(&mut er, duration, drive);
            seg.events = match task {
                TaskKind::NBack => synth_nback_events(&mut er, duration, n_back(level), score),
                TaskKind::VisualSearch => synth_search_events(&mut er, score, 0.25),
            };
            segments.push(seg);
        }
    }
    segments
}

/// Synthesizes `n_participants × 6` segments from the config.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let splits = Splits::new(config);
    let segments: Vec<SessionSegment> = (0..config.n_participants)
        .into_par_iter()
        .map(|i| generate_participant(config, &splits, i))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Dataset::new(segments)
}

/// Like [`generate_dataset`] with all level effects removed: within a task
/// every level uses the average of that task's level parameters.
pub fn generate_null_dataset(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    generate_dataset(&config.nulled())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pupil::{eye_lhipa, WaveletSpec};
    use crate::validate::{has_errors, validate_segment};

    #[test]
    fn control_inverse_is_monotone() {
        let mut last = f64::NEG_INFINITY;
        for k in 0..=40 {
            let u = pupil_control_for(k as f64 * 0.1);
            assert!(u >= last && (-1.0..=1.0).contains(&u));
            last = u;
        }
        for w in LHIPA_CALIBRATION.windows(2) {
            assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
        }
    }

    #[test]
    fn small_dataset_is_valid_and_deterministic() {
        let cfg = GeneratorConfig {
            n_participants: 3,
            ..GeneratorConfig::default()
        };
        let a = generate_dataset(&cfg).unwrap();
        assert_eq!(a.len(), 18);
        for s in a.segments() {
            let issues = validate_segment(s);
            assert!(!has_errors(&issues), "{}: {issues:?}", s.label());
            assert!((120.0..=160.0).contains(&s.duration_s));
        }
        assert_eq!(a, generate_dataset(&cfg).unwrap());
        assert_eq!(a.participant_ids(), vec!["P01", "P02", "P03"]);
    }

    #[test]
    fn ids_are_zero_padded() {
        assert_eq!(participant_id(0, 45), "P01");
        assert_eq!(participant_id(99, 150), "P100");
        assert_eq!(participant_id(4, 150), "P005");
    }

    /// Prints mean LHIPA by control value; used to build the calibration
    /// table. Run with `--ignored --nocapture`.
    #[test]
    #[ignore]
    fn measure_lhipa_calibration() {
        let spec = WaveletSpec::sym16();
        for k in 0..=32 {
            let u = -0.6 + k as f64 * 0.05;
            let reps = 80;
            let vals: Vec<f64> = (0..reps)
                .map(|rep| {
                    let mut r = rng::stream(11, "calibration", (k * 1000 + rep) as u64);
                    let dur = r.random_range(120.0..160.0);
                    let mean = r.random_range(3.0..5.0);
                    let s = synth_pupil(&mut r, dur, 120.0, u, mean);
                    eye_lhipa(&s, &spec, 120.0).unwrap()
                })
                .collect();
            let d = crate::stats::describe(&vals).unwrap();
            println!("({u:.2}, {:.4}), // sd {:.3}", d.mean, d.std.unwrap_or(0.0));
        }
    }
}
