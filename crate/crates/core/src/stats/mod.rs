//! Descriptives, correlations, reliability and paired t-tests over the
//! per-condition feature table.

mod render;
pub mod tdist;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Feature, FeatureRow, LoadLevel, TaskKind};

pub use render::{
    checks_csv, checks_text, correlation_csv, correlation_text, descriptive_csv, descriptive_text,
    reliability_csv, reliability_text,
};
pub use tdist::{t_cdf, t_two_tailed};

pub const DEFAULT_RELIABILITY_THRESHOLD: f64 = 0.7;

/// A test statistic with its degrees of freedom and two-tailed p-value.
/// `degenerate` marks inputs without variance; the statistic and p may then
/// be non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub n: usize,
    pub degenerate: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Pearson correlation with a t-test on `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::input("pearson needs samples of equal length"));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::input("pearson needs at least 3 pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let df = (n - 2) as f64;
    if sxx == 0.0 || syy == 0.0 {
        return Ok(TestResult {
            statistic: f64::NAN,
            df,
            p_value: f64::NAN,
            n,
            degenerate: true,
        });
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let rest = 1.0 - r * r;
    let p_value = if rest <= 0.0 {
        0.0
    } else {
        t_two_tailed(r * (df / rest).sqrt(), df)
    };
    Ok(TestResult {
        statistic: r,
        df,
        p_value,
        n,
        degenerate: false,
    })
}

/// Paired-samples t-test on `x - y`.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::input("paired t-test needs samples of equal length"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::input("paired t-test needs at least 2 pairs"));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let md = mean(&d);
    let sd = sample_var(&d).sqrt();
    let df = (n - 1) as f64;
    if sd == 0.0 {
        let (statistic, p_value) = if md == 0.0 {
            (0.0, 1.0)
        } else {
            (md.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TestResult {
            statistic,
            df,
            p_value,
            n,
            degenerate: true,
        });
    }
    let t = md / (sd / (n as f64).sqrt());
    Ok(TestResult {
        statistic: t,
        df,
        p_value: t_two_tailed(t, df),
        n,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    pub items: usize,
    pub n: usize,
    pub degenerate: bool,
}

/// Cronbach's alpha of complete item columns (all of equal length).
pub fn cronbach_alpha_items(items: &[Vec<f64>]) -> Result<AlphaResult> {
    let k = items.len();
    if k < 2 {
        return Err(Error::input("cronbach alpha needs at least 2 items"));
    }
    let n = items[0].len();
    if items.iter().any(|c| c.len() != n) {
        return Err(Error::input("cronbach alpha items differ in length"));
    }
    if n < 2 {
        return Err(Error::input("cronbach alpha needs at least 2 complete rows"));
    }
    let item_var: f64 = items.iter().map(|c| sample_var(c)).sum();
    let totals: Vec<f64> = (0..n).map(|i| items.iter().map(|c| c[i]).sum()).collect();
    let total_var = sample_var(&totals);
    if total_var == 0.0 {
        return Ok(AlphaResult {
            alpha: f64::NAN,
            items: k,
            n,
            degenerate: true,
        });
    }
    let kf = k as f64;
    Ok(AlphaResult {
        alpha: kf / (kf - 1.0) * (1.0 - item_var / total_var),
        items: k,
        n,
        degenerate: false,
    })
}

/// Cronbach's alpha over the six conditions after listwise deletion.
pub fn cronbach_alpha(matrix: &ConditionMatrix) -> Result<AlphaResult> {
    let rows = matrix.complete_rows();
    let items: Vec<Vec<f64>> = (0..CONDITIONS.len())
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect();
    cronbach_alpha_items(&items)
}

/// The five dimensions analysed statistically, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Hr,
    HrvRmssd,
    LhipaRight,
    LhipaLeft,
    Driving,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Hr,
        Dimension::HrvRmssd,
        Dimension::LhipaRight,
        Dimension::LhipaLeft,
        Dimension::Driving,
    ];

    pub fn feature(self) -> Feature {
        match self {
            Dimension::Hr => Feature::HrMean,
            Dimension::HrvRmssd => Feature::HrvRmssd,
            Dimension::LhipaRight => Feature::LhipaRight,
            Dimension::LhipaLeft => Feature::LhipaLeft,
            Dimension::Driving => Feature::DriveAvgDev,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dimension::Hr => "HR",
            Dimension::HrvRmssd => "HRV-RMSSD",
            Dimension::LhipaRight => "LHIPA right",
            Dimension::LhipaLeft => "LHIPA left",
            Dimension::Driving => "Driving",
        }
    }
}

/// Column order of every per-condition table.
pub const CONDITIONS: [(TaskKind, LoadLevel); 6] = [
    (TaskKind::NBack, LoadLevel::Easy),
    (TaskKind::NBack, LoadLevel::Medium),
    (TaskKind::NBack, LoadLevel::Hard),
    (TaskKind::VisualSearch, LoadLevel::Easy),
    (TaskKind::VisualSearch, LoadLevel::Medium),
    (TaskKind::VisualSearch, LoadLevel::Hard),
];

pub fn condition_index(task: TaskKind, level: LoadLevel) -> usize {
    CONDITIONS
        .iter()
        .position(|c| *c == (task, level))
        .expect("every task and level is a condition")
}

/// One value per participant and condition for a single dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMatrix {
    pub participants: Vec<String>,
    pub values: Vec<[Option<f64>; 6]>,
}

impl ConditionMatrix {
    pub fn complete_rows(&self) -> Vec<[f64; 6]> {
        self.values
            .iter()
            .filter_map(|row| {
                let mut out = [0.0; 6];
                for (o, v) in out.iter_mut().zip(row) {
                    *o = (*v)?;
                }
                Some(out)
            })
            .collect()
    }

    pub fn column(&self, condition: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|r| r[condition]).collect()
    }
}

/// Builds a participant × condition matrix from feature rows; participants
/// are sorted by id.
pub fn condition_matrix(rows: &[FeatureRow], dimension: Dimension) -> ConditionMatrix {
    condition_matrix_by(rows, |r| r.features.get(dimension.feature()))
}

fn condition_matrix_by(rows: &[FeatureRow], value: impl Fn(&FeatureRow) -> Option<f64>) -> ConditionMatrix {
    let mut by_participant: BTreeMap<&str, [Option<f64>; 6]> = BTreeMap::new();
    for r in rows {
        let entry = by_participant.entry(&r.participant_id).or_default();
        entry[condition_index(r.task, r.level)] = value(r);
    }
    ConditionMatrix {
        participants: by_participant.keys().map(|p| p.to_string()).collect(),
        values: by_participant.into_values().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub mean: f64,
    /// `None` for a single observation.
    pub std: Option<f64>,
    pub n: usize,
}

pub fn describe(values: &[f64]) -> Option<Descriptive> {
    if values.is_empty() {
        return None;
    }
    Some(Descriptive {
        mean: mean(values),
        std: (values.len() > 1).then(|| sample_var(values).sqrt()),
        n: values.len(),
    })
}

/// Mean and std per dimension and condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveTable {
    pub rows: Vec<(Dimension, [Option<Descriptive>; 6])>,
}

pub fn descriptive_table(rows: &[FeatureRow]) -> DescriptiveTable {
    let out = Dimension::ALL
        .iter()
        .map(|&dim| {
            let m = condition_matrix(rows, dim);
            let cells: [Option<Descriptive>; 6] = std::array::from_fn(|c| {
                let vals: Vec<f64> = m.column(c).into_iter().flatten().collect();
                describe(&vals)
            });
            (dim, cells)
        })
        .collect();
    DescriptiveTable { rows: out }
}

/// Significance marker: `**` for p < .001, `*` for p < .05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrCell {
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

impl CorrCell {
    pub fn stars(&self) -> &'static str {
        self.p.map_or("", stars)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub title: String,
    pub labels: Vec<String>,
    pub cells: Vec<Vec<CorrCell>>,
}

/// Pairwise Pearson correlations with pairwise deletion of missing values.
/// The diagonal is exactly 1; pairs with fewer than 3 observations or no
/// variance are left empty.
pub fn correlation_matrix(title: &str, labels: Vec<String>, columns: &[Vec<Option<f64>>]) -> CorrelationMatrix {
    let k = columns.len();
    let mut cells = vec![
        vec![
            CorrCell {
                r: None,
                p: None,
                n: 0
            };
            k
        ];
        k
    ];
    for i in 0..k {
        for j in i..k {
            let (x, y): (Vec<f64>, Vec<f64>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            let cell = if i == j {
                CorrCell {
                    r: Some(1.0),
                    p: None,
                    n: x.len(),
                }
            } else {
                match pearson(&x, &y) {
                    Ok(t) if !t.degenerate => CorrCell {
                        r: Some(t.statistic),
                        p: Some(t.p_value),
                        n: t.n,
                    },
                    _ => CorrCell {
                        r: None,
                        p: None,
                        n: x.len(),
                    },
                }
            };
            cells[i][j] = cell;
            cells[j][i] = cell;
        }
    }
    CorrelationMatrix {
        title: title.to_string(),
        labels,
        cells,
    }
}

/// The correlation tables of a dataset: one between the five dimensions
/// averaged over all conditions per participant, then one per task over
/// every (dimension, level) pair.
pub fn correlation_matrices(rows: &[FeatureRow]) -> Vec<CorrelationMatrix> {
    let matrices: Vec<ConditionMatrix> = Dimension::ALL.iter().map(|d| condition_matrix(rows, *d)).collect();
    let mut out = Vec::new();

    let averaged: Vec<Vec<Option<f64>>> = matrices
        .iter()
        .map(|m| {
            m.values
                .iter()
                .map(|row| {
                    let vals: Vec<f64> = row.iter().flatten().copied().collect();
                    (!vals.is_empty()).then(|| mean(&vals))
                })
                .collect()
        })
        .collect();
    out.push(correlation_matrix(
        "Averaged measures",
        Dimension::ALL.iter().map(|d| d.label().to_string()).collect(),
        &averaged,
    ));

    for task in TaskKind::ALL {
        let mut labels = Vec::new();
        let mut columns = Vec::new();
        for (dim, m) in Dimension::ALL.iter().zip(&matrices) {
            for level in LoadLevel::ALL {
                labels.push(format!("{} {}", dim.label(), level.as_str()));
                columns.push(m.column(condition_index(task, level)));
            }
        }
        out.push(correlation_matrix(task.display_name(), labels, &columns));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityEntry {
    pub dimension: Dimension,
    /// `None` when alpha could not be computed.
    pub alpha: Option<f64>,
    pub n: usize,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityScreen {
    pub threshold: f64,
    pub entries: Vec<ReliabilityEntry>,
}

impl ReliabilityScreen {
    pub fn retained(&self) -> Vec<Dimension> {
        self.entries.iter().filter(|e| e.retained).map(|e| e.dimension).collect()
    }

    pub fn excluded(&self) -> Vec<Dimension> {
        self.entries.iter().filter(|e| !e.retained).map(|e| e.dimension).collect()
    }
}

/// Keeps a dimension iff its alpha over the six conditions is at least
/// `threshold`. Dimensions whose alpha cannot be computed are excluded.
pub fn reliability_screen(matrices: &[(Dimension, ConditionMatrix)], threshold: f64) -> ReliabilityScreen {
    let entries = matrices
        .iter()
        .map(|(dim, m)| {
            let res = cronbach_alpha(m).ok().filter(|a| !a.degenerate);
            ReliabilityEntry {
                dimension: *dim,
                alpha: res.map(|a| a.alpha),
                n: res.map_or(0, |a| a.n),
                retained: res.is_some_and(|a| a.alpha >= threshold),
            }
        })
        .collect();
    ReliabilityScreen { threshold, entries }
}

pub fn reliability_from_rows(rows: &[FeatureRow], threshold: f64) -> ReliabilityScreen {
    let matrices: Vec<(Dimension, ConditionMatrix)> = Dimension::ALL
        .iter()
        .map(|d| (*d, condition_matrix(rows, *d)))
        .collect();
    reliability_screen(&matrices, threshold)
}

/// One paired comparison between two load levels of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationCheck {
    pub task: TaskKind,
    pub measure: String,
    pub a: LoadLevel,
    pub b: LoadLevel,
    pub mean_a: f64,
    pub mean_b: f64,
    pub result: TestResult,
}

/// Paired t-tests between load levels per task, on the task score and on
/// every dimension the reliability screen retained.
pub fn manipulation_checks(rows: &[FeatureRow], screen: &ReliabilityScreen) -> Vec<ManipulationCheck> {
    let score_label = |task: TaskKind| match task {
        TaskKind::NBack => "n-back rate",
        TaskKind::VisualSearch => "reaction time",
    };
    let score = condition_matrix_by(rows, |r| r.task_score);
    // `None` names the task score, whose label depends on the task
    let mut measures: Vec<(Option<&str>, ConditionMatrix)> = vec![(None, score)];
    for dim in screen.retained() {
        measures.push((Some(dim.label()), condition_matrix(rows, dim)));
    }
    let pairs = [
        (LoadLevel::Easy, LoadLevel::Medium),
        (LoadLevel::Medium, LoadLevel::Hard),
        (LoadLevel::Easy, LoadLevel::Hard),
    ];
    let mut out = Vec::new();
    for task in TaskKind::ALL {
        for (name, m) in &measures {
            let label = name.unwrap_or(score_label(task)).to_string();
            for (a, b) in pairs {
                let (x, y): (Vec<f64>, Vec<f64>) = m
                    .values
                    .iter()
                    .filter_map(|row| {
                        Some((row[condition_index(task, a)]?, row[condition_index(task, b)]?))
                    })
                    .unzip();
                if let Ok(result) = paired_t(&x, &y) {
                    out.push(ManipulationCheck {
                        task,
                        measure: label.clone(),
                        a,
                        b,
                        mean_a: mean(&x),
                        mean_b: mean(&y),
                        result,
                    });
                }
            }
        }
    }
    out
}
