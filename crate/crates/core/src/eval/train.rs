use serde::{Deserialize, Serialize};

use super::cv::{id_set, select, task_rows, ClassScheme, CvOptions, FeatureSubset};
use super::split::holdout_split;
use crate::error::{Error, Result};
use crate::learn::{greedy_ensemble, grid_search, Classifier, ModelConfig, ModelKind, Scaler, TrainedModel};
use crate::model::{FeatureRow, LoadLevel, TaskKind};

/// Validation outcome of one grid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConfig {
    pub config: ModelConfig,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub train_participants: Vec<String>,
    pub validation_participants: Vec<String>,
    pub ranking: Vec<RankedConfig>,
    /// Validation accuracy of the chosen model, in [0, 1].
    pub val_accuracy: f64,
}

/// Fits one final model of `kind` on a seeded two-thirds/one-third
/// participant split of every segment of `task` in the scheme.
pub fn train_model(
    rows: &[FeatureRow],
    task: TaskKind,
    scheme: ClassScheme,
    subset: FeatureSubset,
    kind: ModelKind,
    seed: u64,
    options: &CvOptions,
) -> Result<TrainOutcome> {
    let rows = task_rows(rows, task, scheme);
    if rows.is_empty() {
        return Err(Error::input(format!("no {task} segments to train on")));
    }
    let ids: Vec<String> = rows.iter().map(|r| r.participant_id.clone()).collect();
    let (train_ids, val_ids) = holdout_split(&ids, seed)?;
    let features = subset.features();
    let train = select(&rows, &id_set(&train_ids), &features);
    let val = select(&rows, &id_set(&val_ids), &features);
    let scaler = Scaler::fit(&train.x)?;
    let (tx, vx) = (scaler.transform(&train.x), scaler.transform(&val.x));
    let ranked = grid_search((&tx, &train.y), (&vx, &val.y), &options.grid)?;

    let (classifier, val_accuracy) = match kind {
        ModelKind::Ensemble => {
            let ens = greedy_ensemble(&ranked, &val.y, options.max_ensemble)?;
            let acc = crate::learn::accuracy(&ens.predict(&vx), &val.y);
            (Classifier::Ensemble(ens), acc)
        }
        _ => {
            let best = ranked
                .iter()
                .find(|c| c.config.kind() == kind)
                .ok_or_else(|| Error::input(format!("the grid has no {} configuration", kind.label())))?;
            (best.model.clone(), best.val_accuracy)
        }
    };
    let labels = LoadLevel::ALL[..scheme.levels().len()]
        .iter()
        .map(|l| l.as_str().to_string())
        .collect();
    let names = features.iter().map(|f| f.name().to_string()).collect();
    Ok(TrainOutcome {
        model: TrainedModel::new(seed, names, labels, scaler, classifier),
        train_participants: train_ids,
        validation_participants: val_ids,
        ranking: ranked
            .iter()
            .map(|c| RankedConfig {
                config: c.config,
                val_accuracy: c.val_accuracy,
            })
            .collect(),
        val_accuracy,
    })
}
