use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::SplitPlan;
use crate::error::{Error, Result};
use crate::learn::{accuracy, greedy_ensemble, grid_search, Classifier, Grid, ModelKind, Scaler};
use crate::model::{Feature, FeatureRow, LoadLevel, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    All,
    EyeDrive,
    HeartEye,
    HeartDrive,
    HeartAlone,
}

const HEART: [Feature; 5] = [
    Feature::HrMean,
    Feature::HrMin,
    Feature::HrMax,
    Feature::HrStd,
    Feature::HrvRmssd,
];
const EYE: [Feature; 2] = [Feature::LhipaLeft, Feature::LhipaRight];
const DRIVE: [Feature; 1] = [Feature::DriveAvgDev];

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 5] = [
        FeatureSubset::All,
        FeatureSubset::EyeDrive,
        FeatureSubset::HeartEye,
        FeatureSubset::HeartDrive,
        FeatureSubset::HeartAlone,
    ];

    pub fn features(self) -> Vec<Feature> {
        let groups: &[&[Feature]] = match self {
            FeatureSubset::All => &[&HEART, &EYE, &DRIVE],
            FeatureSubset::EyeDrive => &[&EYE, &DRIVE],
            FeatureSubset::HeartEye => &[&HEART, &EYE],
            FeatureSubset::HeartDrive => &[&HEART, &DRIVE],
            FeatureSubset::HeartAlone => &[&HEART],
        };
        groups.iter().flat_map(|g| g.iter().copied()).collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            FeatureSubset::All => "All Features",
            FeatureSubset::EyeDrive => "Eye & Drive",
            FeatureSubset::HeartEye => "Heart & Eye",
            FeatureSubset::HeartDrive => "Heart & Drive",
            FeatureSubset::HeartAlone => "Heart alone",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSubset::All => "all",
            FeatureSubset::EyeDrive => "eye_drive",
            FeatureSubset::HeartEye => "heart_eye",
            FeatureSubset::HeartDrive => "heart_drive",
            FeatureSubset::HeartAlone => "heart_alone",
        }
    }
}

impl FromStr for FeatureSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSubset::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown feature subset {s:?} (expected all, eye_drive, heart_eye, heart_drive or heart_alone)"
                ))
            })
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassScheme {
    /// Easy, medium and hard.
    Multi,
    /// Easy (low) against medium; hard segments are dropped.
    Binary,
}

impl ClassScheme {
    pub fn levels(self) -> &'static [LoadLevel] {
        match self {
            ClassScheme::Multi => &LoadLevel::ALL,
            ClassScheme::Binary => &[LoadLevel::Easy, LoadLevel::Medium],
        }
    }

    pub fn chance_percent(self) -> f64 {
        100.0 / self.levels().len() as f64
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassScheme::Multi => "multi",
            ClassScheme::Binary => "binary",
        }
    }
}

impl FromStr for ClassScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi" => Ok(ClassScheme::Multi),
            "binary" => Ok(ClassScheme::Binary),
            _ => Err(Error::input(format!("unknown class scheme {s:?} (expected multi or binary)"))),
        }
    }
}

impl fmt::Display for ClassScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub grid: Grid,
    pub max_ensemble: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            grid: Grid::default(),
            max_ensemble: crate::learn::DEFAULT_MAX_ENSEMBLE,
        }
    }
}

/// Accuracy of one (model, subset) cell, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
}

impl ReportCell {
    fn from_folds(fold_accuracies: Vec<f64>) -> ReportCell {
        let n = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / n;
        let std = if fold_accuracies.len() > 1 {
            (fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        ReportCell {
            fold_accuracies,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub task: TaskKind,
    pub scheme: ClassScheme,
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub subsets: Vec<FeatureSubset>,
    /// `cells[model][subset]`; `None` when the grid has no configuration of
    /// that model kind.
    pub cells: Vec<Vec<Option<ReportCell>>>,
    pub chance_percent: f64,
}

impl EvaluationReport {
    pub fn cell(&self, model: ModelKind, subset: FeatureSubset) -> Option<&ReportCell> {
        let m = self.models.iter().position(|k| *k == model)?;
        let s = self.subsets.iter().position(|k| *k == subset)?;
        self.cells[m][s].as_ref()
    }
}

pub(crate) struct Split {
    pub(crate) x: Vec<Vec<Option<f64>>>,
    pub(crate) y: Vec<usize>,
}

pub(crate) fn id_set(ids: &[String]) -> HashSet<&str> {
    ids.iter().map(String::as_str).collect()
}

pub(crate) fn select(rows: &[&FeatureRow], members: &HashSet<&str>, features: &[Feature]) -> Split {
    let picked: Vec<&&FeatureRow> = rows
        .iter()
        .filter(|r| members.contains(r.participant_id.as_str()))
        .collect();
    Split {
        x: picked
            .iter()
            .map(|r| features.iter().map(|f| r.features.get(*f)).collect())
            .collect(),
        y: picked.iter().map(|r| r.level.code() as usize).collect(),
    }
}

/// Rows of one task restricted to the scheme's levels, sorted by
/// (participant, level).
pub(crate) fn task_rows(rows: &[FeatureRow], task: TaskKind, scheme: ClassScheme) -> Vec<&FeatureRow> {
    let mut out: Vec<&FeatureRow> = rows
        .iter()
        .filter(|r| r.task == task && scheme.levels().contains(&r.level))
        .collect();
    out.sort_by(|a, b| (&a.participant_id, a.level).cmp(&(&b.participant_id, b.level)));
    out
}

/// Test accuracies (percent) of every model row for one fold and subset.
fn fold_subset(
    rows: &[&FeatureRow],
    fold: &super::split::Fold,
    subset: FeatureSubset,
    options: &CvOptions,
) -> Result<Vec<Option<f64>>> {
    let features = subset.features();
    let train = select(rows, &id_set(&fold.train), &features);
    let val = select(rows, &id_set(&fold.validation), &features);
    let test = select(rows, &id_set(&fold.test), &features);
    if test.y.is_empty() {
        return Err(Error::input("an outer fold has no test rows for this task"));
    }
    if train.y.is_empty() || val.y.is_empty() {
        return Err(Error::input("an inner split has no rows for this task"));
    }
    let scaler = Scaler::fit(&train.x)?;
    let (tx, vx, sx) = (scaler.transform(&train.x), scaler.transform(&val.x), scaler.transform(&test.x));
    let ranked = grid_search((&tx, &train.y), (&vx, &val.y), &options.grid)?;
    let score = |model: &Classifier| 100.0 * accuracy(&model.predict(&sx), &test.y);
    Ok(ModelKind::ROWS
        .iter()
        .map(|kind| match kind {
            ModelKind::Ensemble => {
                let ens = greedy_ensemble(&ranked, &val.y, options.max_ensemble).ok()?;
                Some(score(&Classifier::Ensemble(ens)))
            }
            _ => ranked
                .iter()
                .find(|c| c.config.kind() == *kind)
                .map(|c| score(&c.model)),
        })
        .collect())
}

/// Nested cross-validation over the plan's outer folds.
///
/// Per fold and subset, a scaler is fitted on inner-train rows, every grid
/// configuration is trained on inner-train and ranked on validation, and
/// test accuracy is taken for the best configuration of each model kind
/// and for the greedy ensemble over all ranked candidates.
pub fn run_nested_cv(
    rows: &[FeatureRow],
    task: TaskKind,
    scheme: ClassScheme,
    subsets: &[FeatureSubset],
    plan: &SplitPlan,
    options: &CvOptions,
) -> Result<EvaluationReport> {
    if subsets.is_empty() {
        return Err(Error::input("no feature subsets to evaluate"));
    }
    let task_rows = task_rows(rows, task, scheme);
    let planned: HashSet<&str> = plan
        .folds
        .iter()
        .flat_map(|f| f.test.iter().chain(&f.validation).chain(&f.train))
        .map(String::as_str)
        .collect();
    if let Some(r) = task_rows.iter().find(|r| !planned.contains(r.participant_id.as_str())) {
        return Err(Error::input(format!(
            "participant {} is not covered by the split plan",
            r.participant_id
        )));
    }

    let jobs: Vec<(usize, usize)> = (0..plan.folds.len())
        .flat_map(|f| (0..subsets.len()).map(move |s| (f, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(f, s)| fold_subset(&task_rows, &plan.folds[f], subsets[s], options))
        .collect::<Result<Vec<_>>>()?;

    let cells = ModelKind::ROWS
        .iter()
        .enumerate()
        .map(|(m, _)| {
            (0..subsets.len())
                .map(|s| {
                    let folds: Option<Vec<f64>> = (0..plan.folds.len())
                        .map(|f| results[f * subsets.len() + s][m])
                        .collect();
                    folds.map(ReportCell::from_folds)
                })
                .collect()
        })
        .collect();
    Ok(EvaluationReport {
        task,
        scheme,
        seed: plan.seed,
        models: ModelKind::ROWS.to_vec(),
        subsets: subsets.to_vec(),
        cells,
        chance_percent: scheme.chance_percent(),
    })
}
