//! Lane-change driving metrics: ideal path and lateral deviation.
//!
//! Driving traces carry time and lateral position only. Longitudinal
//! position is reconstructed as `speed * t_s` with the nominal lane-change
//! task speed (60 km/h), and lane changes are read from the `target_lane`
//! column.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DrivingSample;

pub const DEVIATION_RATE_HZ: f64 = 33.0;
pub const DEFAULT_LANE_WIDTH_M: f64 = 3.5;
pub const DEFAULT_TRANSITION_M: f64 = 36.0;
pub const DEFAULT_SPEED_MPS: f64 = 60.0 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChange {
    /// Longitudinal position where the ramp starts, meters.
    pub s: f64,
    pub from_lane: u8,
    pub to_lane: u8,
}

/// Piecewise-linear lateral reference: lane centers joined by linear ramps
/// of `transition_length` meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealPath {
    pub lane_width: f64,
    pub transition_length: f64,
    pub initial_lane: u8,
    pub change_points: Vec<LaneChange>,
    /// Lateral position of lane 0's center.
    pub origin: f64,
}

impl IdealPath {
    pub fn lane_center(&self, lane: u8) -> f64 {
        self.origin + lane as f64 * self.lane_width
    }

    /// Lateral offset of the path at longitudinal position `s`.
    pub fn offset_at(&self, s: f64) -> f64 {
        let mut lane = self.initial_lane;
        for c in &self.change_points {
            if s < c.s {
                break;
            }
            let end = c.s + self.transition_length;
            if s < end {
                let w = (s - c.s) / self.transition_length;
                let from = self.lane_center(c.from_lane);
                let to = self.lane_center(c.to_lane);
                return from + w * (to - from);
            }
            lane = c.to_lane;
        }
        self.lane_center(lane)
    }

    /// The same path moved by `ds` meters forward and `dy` meters sideways.
    pub fn shifted(&self, ds: f64, dy: f64) -> IdealPath {
        let mut out = self.clone();
        out.origin += dy;
        for c in &mut out.change_points {
            c.s += ds;
        }
        out
    }
}

/// Builds the ideal path starting in `initial_lane`. Change points must be
/// ordered, chained (each starts from the previous target lane) and spaced
/// further apart than `transition_length`.
pub fn build_ideal_path(
    initial_lane: u8,
    change_points: &[LaneChange],
    lane_width: f64,
    transition_length: f64,
) -> Result<IdealPath> {
    if !(lane_width > 0.0 && transition_length > 0.0) {
        return Err(Error::input("lane width and transition length must be positive"));
    }
    let mut lane = initial_lane;
    for (i, c) in change_points.iter().enumerate() {
        if c.from_lane != lane {
            return Err(Error::input(format!(
                "lane change {i} starts from lane {} but the path is in lane {lane}",
                c.from_lane
            )));
        }
        if i > 0 && c.s - change_points[i - 1].s <= transition_length {
            return Err(Error::input("overlapping transitions"));
        }
        lane = c.to_lane;
    }
    Ok(IdealPath {
        lane_width,
        transition_length,
        initial_lane,
        change_points: change_points.to_vec(),
        origin: 0.0,
    })
}

/// Which part of the trace feeds the average-deviation feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DeviationWindow {
    FullSegment,
    /// Only samples within `[s - before_m, s + transition + after_m]` of a
    /// lane change.
    AroundChanges { before_m: f64, after_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingConfig {
    pub speed_mps: f64,
    pub lane_width: f64,
    pub transition_length: f64,
    pub window: DeviationWindow,
}

impl Default for DrivingConfig {
    fn default() -> Self {
        DrivingConfig {
            speed_mps: DEFAULT_SPEED_MPS,
            lane_width: DEFAULT_LANE_WIDTH_M,
            transition_length: DEFAULT_TRANSITION_M,
            window: DeviationWindow::FullSegment,
        }
    }
}

/// Reads the ideal path off the `target_lane` column: a change of target
/// lane at time `t` starts a ramp at `s = speed * t`.
pub fn ideal_path_from_trace(trace: &[DrivingSample], config: &DrivingConfig) -> Result<IdealPath> {
    let first = trace
        .first()
        .ok_or_else(|| Error::input("empty driving trace"))?;
    let mut changes = Vec::new();
    let mut lane = first.target_lane;
    for s in trace {
        if s.target_lane != lane {
            changes.push(LaneChange {
                s: s.t_s * config.speed_mps,
                from_lane: lane,
                to_lane: s.target_lane,
            });
            lane = s.target_lane;
        }
    }
    build_ideal_path(first.target_lane, &changes, config.lane_width, config.transition_length)
}

/// Absolute lateral deviation from the ideal path on a 33 Hz grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSeries {
    pub rate_hz: f64,
    pub start_s: f64,
    pub values: Vec<f64>,
}

/// Resamples the trace to 33 Hz and measures `|lateral - path|`.
///
/// The grid is `t0 + i / 33` for every point up to and including the last
/// trace timestamp, so a trace of 330 samples at 33 Hz maps to 330 values.
pub fn deviation_series(trace: &[DrivingSample], path: &IdealPath, speed_mps: f64) -> Result<DeviationSeries> {
    if trace.is_empty() {
        return Err(Error::input("empty driving trace"));
    }
    if trace.windows(2).any(|w| !(w[1].t_s > w[0].t_s)) {
        return Err(Error::input("driving timestamps must increase"));
    }
    let t0 = trace[0].t_s;
    let span = trace[trace.len() - 1].t_s - t0;
    if span < 1.0 - 1e-9 {
        return Err(Error::input("driving trace shorter than 1 s"));
    }
    let n = (span * DEVIATION_RATE_HZ + 1e-9).floor() as usize + 1;
    let mut values = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let t = t0 + i as f64 / DEVIATION_RATE_HZ;
        while j + 2 < trace.len() && trace[j + 1].t_s <= t {
            j += 1;
        }
        let a = &trace[j];
        let b = &trace[(j + 1).min(trace.len() - 1)];
        let lateral = if b.t_s > a.t_s {
            let w = ((t - a.t_s) / (b.t_s - a.t_s)).clamp(0.0, 1.0);
            a.lateral_position_m + w * (b.lateral_position_m - a.lateral_position_m)
        } else {
            a.lateral_position_m
        };
        values.push((lateral - path.offset_at(t * speed_mps)).abs());
    }
    Ok(DeviationSeries {
        rate_hz: DEVIATION_RATE_HZ,
        start_s: t0,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

pub fn deviation_stats(values: &[f64]) -> Result<DeviationStats> {
    if values.is_empty() {
        return Err(Error::input("empty deviation series"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(DeviationStats {
        mean,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        std,
    })
}

/// Average lateral deviation of one trace under `config`.
pub fn drive_avg_dev(trace: &[DrivingSample], config: &DrivingConfig) -> Result<f64> {
    let path = ideal_path_from_trace(trace, config)?;
    let dev = deviation_series(trace, &path, config.speed_mps)?;
    let values: Vec<f64> = match config.window {
        DeviationWindow::FullSegment => dev.values,
        DeviationWindow::AroundChanges { before_m, after_m } => dev
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let s = (dev.start_s + *i as f64 / dev.rate_hz) * config.speed_mps;
                path.change_points
                    .iter()
                    .any(|c| s >= c.s - before_m && s <= c.s + path.transition_length + after_m)
            })
            .map(|(_, v)| *v)
            .collect(),
    };
    if values.is_empty() {
        return Err(Error::input("no driving samples near a lane change"));
    }
    Ok(deviation_stats(&values)?.mean)
}
