use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LoadLevel, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

const fn ms(mean: f64, sd: f64) -> MeanSd {
    MeanSd { mean, sd }
}

/// Targets for one (task, level) condition, pooled over participants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub hr_bpm: MeanSd,
    pub rmssd_ms: MeanSd,
    pub lhipa_right: MeanSd,
    pub lhipa_left: MeanSd,
    pub drive_dev_m: MeanSd,
    /// N-back: correct-response rate. Visual search: reaction time in s.
    pub score: MeanSd,
}

/// Share of each dimension's variance that sits between participants.
/// The rest is within-participant noise around the level shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineShares {
    pub hr: f64,
    pub rmssd: f64,
    pub lhipa_right: f64,
    pub lhipa_left: f64,
    pub drive: f64,
}

impl Default for BaselineShares {
    /// Derived from six-condition Cronbach alphas of 0.98 (heart), 0.36
    /// (LHIPA right), 0.31 (LHIPA left) and 0.33 (driving) via
    /// `rho = alpha / (6 - 5 alpha)`.
    fn default() -> Self {
        BaselineShares {
            hr: 0.891,
            rmssd: 0.891,
            lhipa_right: 0.0857,
            lhipa_left: 0.0697,
            drive: 0.0759,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_participants: usize,
    pub seed: u64,
    pub duration_min_s: f64,
    pub duration_max_s: f64,
    pub pupil_rate_hz: f64,
    /// Indexed `[task][level]` with tasks in `TaskKind::ALL` order.
    pub levels: [[LevelParams; 3]; 2],
    pub baseline_share: BaselineShares,
}

pub const DEFAULT_PARTICIPANTS: usize = 45;

const NBACK: [LevelParams; 3] = [
    LevelParams {
        hr_bpm: ms(77.49, 12.60),
        rmssd_ms: ms(37.79, 19.50),
        lhipa_right: ms(2.38, 0.50),
        lhipa_left: ms(2.37, 0.51),
        drive_dev_m: ms(0.15, 0.08),
        score: ms(0.90, 0.08),
    },
    LevelParams {
        hr_bpm: ms(82.54, 14.17),
        rmssd_ms: ms(31.86, 15.99),
        lhipa_right: ms(2.28, 0.31),
        lhipa_left: ms(2.34, 0.34),
        drive_dev_m: ms(0.21, 0.13),
        score: ms(0.75, 0.12),
    },
    LevelParams {
        hr_bpm: ms(82.97, 14.78),
        rmssd_ms: ms(30.34, 14.42),
        lhipa_right: ms(2.29, 0.43),
        lhipa_left: ms(2.29, 0.30),
        drive_dev_m: ms(0.23, 0.16),
        score: ms(0.50, 0.25),
    },
];

const VISUAL_SEARCH: [LevelParams; 3] = [
    LevelParams {
        hr_bpm: ms(77.29, 11.81),
        rmssd_ms: ms(38.37, 18.53),
        lhipa_right: ms(2.46, 0.58),
        lhipa_left: ms(2.30, 0.22),
        drive_dev_m: ms(0.24, 0.11),
        score: ms(1.10, 0.20),
    },
    LevelParams {
        hr_bpm: ms(78.58, 12.00),
        rmssd_ms: ms(36.52, 17.20),
        lhipa_right: ms(2.39, 0.56),
        lhipa_left: ms(2.30, 0.24),
        drive_dev_m: ms(0.24, 0.12),
        score: ms(1.25, 0.22),
    },
    LevelParams {
        hr_bpm: ms(78.63, 12.70),
        rmssd_ms: ms(37.70, 19.36),
        lhipa_right: ms(2.44, 0.58),
        lhipa_left: ms(2.30, 0.24),
        drive_dev_m: ms(0.27, 0.12),
        score: ms(1.40, 0.25),
    },
];

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_participants: DEFAULT_PARTICIPANTS,
            seed: crate::rng::DEFAULT_SEED,
            duration_min_s: 120.0,
            duration_max_s: 160.0,
            pupil_rate_hz: crate::pupil::DEFAULT_PUPIL_RATE_HZ,
            levels: [NBACK, VISUAL_SEARCH],
            baseline_share: BaselineShares::default(),
        }
    }
}

fn task_index(task: TaskKind) -> usize {
    match task {
        TaskKind::NBack => 0,
        TaskKind::VisualSearch => 1,
    }
}

const PARAMS: [&str; 6] = ["hr", "rmssd", "lhipa_right", "lhipa_left", "drive", "score"];

fn param_mut<'a>(p: &'a mut LevelParams, name: &str) -> Option<&'a mut MeanSd> {
    Some(match name {
        "hr" => &mut p.hr_bpm,
        "rmssd" => &mut p.rmssd_ms,
        "lhipa_right" => &mut p.lhipa_right,
        "lhipa_left" => &mut p.lhipa_left,
        "drive" => &mut p.drive_dev_m,
        "score" => &mut p.score,
        _ => return None,
    })
}

fn param(p: &LevelParams, name: &str) -> MeanSd {
    let mut copy = *p;
    *param_mut(&mut copy, name).expect("known parameter")
}

fn share_mut<'a>(s: &'a mut BaselineShares, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "hr" => &mut s.hr,
        "rmssd" => &mut s.rmssd,
        "lhipa_right" => &mut s.lhipa_right,
        "lhipa_left" => &mut s.lhipa_left,
        "drive" => &mut s.drive,
        _ => return None,
    })
}

impl GeneratorConfig {
    pub fn level(&self, task: TaskKind, level: LoadLevel) -> &LevelParams {
        &self.levels[task_index(task)][level.code() as usize]
    }

    pub fn level_mut(&mut self, task: TaskKind, level: LoadLevel) -> &mut LevelParams {
        &mut self.levels[task_index(task)][level.code() as usize]
    }

    /// The same config with every level of a task set to the average of
    /// that task's three levels, so labels carry no signal.
    pub fn nulled(&self) -> GeneratorConfig {
        let mut out = self.clone();
        for t in 0..2 {
            let src = self.levels[t];
            let mut avg = src[0];
            for name in PARAMS {
                let m = param_mut(&mut avg, name).expect("known parameter");
                m.mean = src.iter().map(|p| param(p, name).mean).sum::<f64>() / 3.0;
                m.sd = src.iter().map(|p| param(p, name).sd).sum::<f64>() / 3.0;
            }
            out.levels[t] = [avg; 3];
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::input(format!("invalid generator config: {m}")));
        if self.n_participants == 0 {
            return bad("n_participants must be at least 1".into());
        }
        if !(60.0..=300.0).contains(&self.duration_min_s)
            || !(60.0..=300.0).contains(&self.duration_max_s)
            || self.duration_min_s > self.duration_max_s
        {
            return bad(format!(
                "duration range [{}, {}] must be ordered and within [60, 300] s",
                self.duration_min_s, self.duration_max_s
            ));
        }
        // the visual-search schedule needs 40 arrays at 3 s
        if self.duration_min_s < 120.0 {
            return bad("duration_min_s must be at least 120 s for the task schedules".into());
        }
        if !(self.pupil_rate_hz > 0.0) {
            return bad("pupil_rate_hz must be positive".into());
        }
        for task in TaskKind::ALL {
            for level in LoadLevel::ALL {
                let p = self.level(task, level);
                let key = format!("{task}.{level}");
                for name in PARAMS {
                    let v = param(p, name);
                    if !v.mean.is_finite() || !v.sd.is_finite() || v.sd < 0.0 {
                        return bad(format!("{key}.{name} needs a finite mean and sd >= 0"));
                    }
                }
                if p.hr_bpm.mean <= 0.0 {
                    return bad(format!("{key}.hr_mean must be positive"));
                }
                let mean_rr = 60_000.0 / p.hr_bpm.mean;
                if p.rmssd_ms.mean <= 0.0 || p.rmssd_ms.mean > mean_rr {
                    return bad(format!(
                        "{key}.rmssd_mean {} is infeasible for a mean RR of {mean_rr:.1} ms",
                        p.rmssd_ms.mean
                    ));
                }
                if p.drive_dev_m.mean < 0.0 || p.lhipa_left.mean < 0.0 || p.lhipa_right.mean < 0.0 {
                    return bad(format!("{key}: LHIPA and driving means must be non-negative"));
                }
            }
        }
        for name in ["hr", "rmssd", "lhipa_right", "lhipa_left", "drive"] {
            let mut s = self.baseline_share;
            let v = *share_mut(&mut s, name).expect("known share");
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("baseline_share.{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown keys are errors.
    pub fn parse(text: &str) -> Result<GeneratorConfig> {
        let mut cfg = GeneratorConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::input(format!("config line {}: {m}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || value.parse::<f64>().map_err(|_| err(&format!("{key}: not a number: {value:?}")));
            match key {
                "n_participants" => {
                    cfg.n_participants = value.parse().map_err(|_| err("n_participants: not an integer"))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| err("seed: not an unsigned integer"))?,
                "duration_min_s" => cfg.duration_min_s = float()?,
                "duration_max_s" => cfg.duration_max_s = float()?,
                "pupil_rate_hz" => cfg.pupil_rate_hz = float()?,
                _ => {
                    let parts: Vec<&str> = key.split('.').collect();
                    match parts.as_slice() {
                        ["baseline_share", dim] => {
                            *share_mut(&mut cfg.baseline_share, dim).ok_or_else(|| err(&format!("unknown key {key:?}")))? =
                                float()?
                        }
                        [task, level, field] => {
                            let unknown = || err(&format!("unknown key {key:?}"));
                            let task: TaskKind = task.parse().map_err(|_| unknown())?;
                            let level: LoadLevel = level.parse().map_err(|_| unknown())?;
                            let (name, which) = field
                                .rsplit_once('_')
                                .filter(|(_, w)| *w == "mean" || *w == "sd")
                                .ok_or_else(unknown)?;
                            let slot = param_mut(cfg.level_mut(task, level), name).ok_or_else(unknown)?;
                            if which == "mean" {
                                slot.mean = float()?;
                            } else {
                                slot.sd = float()?;
                            }
                        }
                        _ => return Err(err(&format!("unknown key {key:?}"))),
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every key with its value, in a fixed order, in the format `parse`
    /// reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_participants = {}", self.n_participants);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "duration_min_s = {}", self.duration_min_s);
        let _ = writeln!(out, "duration_max_s = {}", self.duration_max_s);
        let _ = writeln!(out, "pupil_rate_hz = {}", self.pupil_rate_hz);
        for task in TaskKind::ALL {
            for level in LoadLevel::ALL {
                let p = self.level(task, level);
                for name in PARAMS {
                    let v = param(p, name);
                    let _ = writeln!(out, "{task}.{level}.{name}_mean = {}", v.mean);
                    let _ = writeln!(out, "{task}.{level}.{name}_sd = {}", v.sd);
                }
            }
        }
        let s = self.baseline_share;
        for (name, v) in [
            ("hr", s.hr),
            ("rmssd", s.rmssd),
            ("lhipa_right", s.lhipa_right),
            ("lhipa_left", s.lhipa_left),
            ("drive", s.drive),
        ] {
            let _ = writeln!(out, "baseline_share.{name} = {v}");
        }
        out
    }
}
