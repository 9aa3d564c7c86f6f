//! Classifiers, hyperparameter grid search and greedy ensemble selection.
//!
//! Classifiers work on standardized dense rows and integer class labels.
//! [`TrainedModel`] bundles a classifier with the [`Scaler`] that produced
//! its inputs.

pub mod adaboost;
pub mod knn;
pub mod lda;
pub mod scaler;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

pub use adaboost::{fit_adaboost, AdaBoostModel};
pub use knn::{fit_knn, KnnModel};
pub use lda::{fit_lda, LdaModel};
pub use scaler::Scaler;

pub const DEFAULT_MAX_ENSEMBLE: usize = 10;

pub(crate) fn check_xy(x: &[Vec<f64>], y: &[usize]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::input("no training rows"));
    }
    if x.len() != y.len() {
        return Err(Error::input("feature rows and labels differ in count"));
    }
    let p = x[0].len();
    if p == 0 || x.iter().any(|r| r.len() != p) {
        return Err(Error::input("training rows must share a non-zero width"));
    }
    Ok(p)
}

/// Sorted distinct labels.
pub(crate) fn class_list(y: &[usize]) -> Vec<usize> {
    let mut c = y.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lda,
    Knn,
    AdaBoost,
    Ensemble,
}

impl ModelKind {
    pub const ROWS: [ModelKind; 4] = [ModelKind::Lda, ModelKind::Knn, ModelKind::AdaBoost, ModelKind::Ensemble];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Lda => "LDA",
            ModelKind::Knn => "KNN",
            ModelKind::AdaBoost => "AdaBoost",
            ModelKind::Ensemble => "Ensemble",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelConfig {
    Lda { shrinkage: f64 },
    Knn { k: usize },
    AdaBoost { n_stumps: usize },
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Lda { .. } => ModelKind::Lda,
            ModelConfig::Knn { .. } => ModelKind::Knn,
            ModelConfig::AdaBoost { .. } => ModelKind::AdaBoost,
        }
    }

    pub fn fit(&self, x: &[Vec<f64>], y: &[usize]) -> Result<Classifier> {
        Ok(match *self {
            ModelConfig::Lda { shrinkage } => Classifier::Lda(fit_lda(x, y, shrinkage)?),
            ModelConfig::Knn { k } => Classifier::Knn(fit_knn(x, y, k)?),
            ModelConfig::AdaBoost { n_stumps } => Classifier::AdaBoost(fit_adaboost(x, y, n_stumps)?),
        })
    }
}

impl std::fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelConfig::Lda { shrinkage } => write!(f, "LDA(shrinkage={shrinkage})"),
            ModelConfig::Knn { k } => write!(f, "KNN(k={k})"),
            ModelConfig::AdaBoost { n_stumps } => write!(f, "AdaBoost(n_stumps={n_stumps})"),
        }
    }
}

/// Hyperparameter grids searched per model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lda_shrinkage: Vec<f64>,
    pub knn_k: Vec<usize>,
    pub adaboost_stumps: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lda_shrinkage: vec![0.01, 0.1, 0.3, 0.5],
            knn_k: vec![1, 3, 5, 7, 9],
            adaboost_stumps: vec![25, 50, 100],
        }
    }
}

impl Grid {
    /// All configurations in kind order, then grid order.
    pub fn configs(&self) -> Vec<ModelConfig> {
        let mut out: Vec<ModelConfig> = self
            .lda_shrinkage
            .iter()
            .map(|&shrinkage| ModelConfig::Lda { shrinkage })
            .collect();
        out.extend(self.knn_k.iter().map(|&k| ModelConfig::Knn { k }));
        out.extend(self.adaboost_stumps.iter().map(|&n_stumps| ModelConfig::AdaBoost { n_stumps }));
        out
    }

    pub fn is_empty(&self) -> bool {
        self.configs().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub config: ModelConfig,
    pub model: Classifier,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub members: Vec<EnsembleMember>,
}

impl EnsembleModel {
    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        let preds: Vec<(Vec<usize>, usize)> = self
            .members
            .iter()
            .map(|m| (m.model.predict(x), m.multiplicity))
            .collect();
        let refs: Vec<(&[usize], usize)> = preds.iter().map(|(p, m)| (p.as_slice(), *m)).collect();
        plurality_vote(&refs, x.len())
    }
}

/// Multiplicity-weighted vote per row; ties go to the lowest label.
pub fn plurality_vote(members: &[(&[usize], usize)], n: usize) -> Vec<usize> {
    let n_labels = members
        .iter()
        .flat_map(|(p, _)| p.iter())
        .max()
        .map_or(0, |m| m + 1);
    let mut votes = vec![0usize; n_labels];
    (0..n)
        .map(|i| {
            votes.iter_mut().for_each(|v| *v = 0);
            for (pred, mult) in members {
                votes[pred[i]] += mult;
            }
            let mut best = 0;
            for (label, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = label;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "params")]
pub enum Classifier {
    Lda(LdaModel),
    Knn(KnnModel),
    AdaBoost(AdaBoostModel),
    Ensemble(EnsembleModel),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Lda(_) => ModelKind::Lda,
            Classifier::Knn(_) => ModelKind::Knn,
            Classifier::AdaBoost(_) => ModelKind::AdaBoost,
            Classifier::Ensemble(_) => ModelKind::Ensemble,
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        match self {
            Classifier::Lda(m) => m.predict(x),
            Classifier::Knn(m) => m.predict(x),
            Classifier::AdaBoost(m) => m.predict(x),
            Classifier::Ensemble(m) => m.predict(x),
        }
    }
}

/// A trained configuration with its validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub config: ModelConfig,
    pub model: Classifier,
    pub val_predictions: Vec<usize>,
    pub val_accuracy: f64,
}

/// Trains every configuration on `train` and ranks them by validation
/// accuracy, best first. Ties keep kind order (LDA, KNN, AdaBoost) and then
/// grid order. KNN configurations with more neighbors than training rows
/// are skipped.
pub fn grid_search(
    train: (&[Vec<f64>], &[usize]),
    val: (&[Vec<f64>], &[usize]),
    grid: &Grid,
) -> Result<Vec<Candidate>> {
    let (vx, vy) = val;
    if vx.is_empty() {
        return Err(Error::input("empty validation set"));
    }
    let configs: Vec<ModelConfig> = grid
        .configs()
        .into_iter()
        .filter(|c| !matches!(c, ModelConfig::Knn { k } if *k > train.0.len()))
        .collect();
    if configs.is_empty() {
        return Err(Error::input("no model configuration to search"));
    }
    let mut candidates = configs
        .par_iter()
        .map(|config| {
            let model = config.fit(train.0, train.1)?;
            let val_predictions = model.predict(vx);
            let val_accuracy = accuracy(&val_predictions, vy);
            Ok(Candidate {
                config: *config,
                model,
                val_predictions,
                val_accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by(|a, b| b.val_accuracy.total_cmp(&a.val_accuracy));
    Ok(candidates)
}

/// Selected members as `(candidate index, multiplicity)` plus the resulting
/// validation accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSelection {
    pub members: Vec<(usize, usize)>,
    pub val_accuracy: f64,
}

/// Greedy forward selection with replacement. Starts from the best
/// candidate and adds whichever candidate raises validation accuracy the
/// most, stopping at `max_size` members or when nothing improves.
pub fn greedy_selection(candidates: &[Candidate], val_y: &[usize], max_size: usize) -> Result<EnsembleSelection> {
    if candidates.is_empty() {
        return Err(Error::input("greedy ensemble needs at least one candidate"));
    }
    let best = (0..candidates.len())
        .reduce(|a, b| {
            if candidates[b].val_accuracy > candidates[a].val_accuracy {
                b
            } else {
                a
            }
        })
        .expect("non-empty");
    let mut counts = vec![0usize; candidates.len()];
    counts[best] = 1;
    let vote_accuracy = |counts: &[usize]| {
        let members: Vec<(&[usize], usize)> = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(i, c)| (candidates[i].val_predictions.as_slice(), *c))
            .collect();
        accuracy(&plurality_vote(&members, val_y.len()), val_y)
    };
    let mut current = vote_accuracy(&counts);
    let mut size = 1;
    while size < max_size.max(1) {
        let mut best_add: Option<(usize, f64)> = None;
        for i in 0..candidates.len() {
            counts[i] += 1;
            let acc = vote_accuracy(&counts);
            counts[i] -= 1;
            if best_add.is_none_or(|(_, a)| acc > a) {
                best_add = Some((i, acc));
            }
        }
        match best_add {
            Some((i, acc)) if acc > current => {
                counts[i] += 1;
                current = acc;
                size += 1;
            }
            _ => break,
        }
    }
    Ok(EnsembleSelection {
        members: counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, c)| (i, *c)).collect(),
        val_accuracy: current,
    })
}

pub fn greedy_ensemble(candidates: &[Candidate], val_y: &[usize], max_size: usize) -> Result<EnsembleModel> {
    let sel = greedy_selection(candidates, val_y, max_size)?;
    Ok(EnsembleModel {
        members: sel
            .members
            .iter()
            .map(|&(i, multiplicity)| EnsembleMember {
                config: candidates[i].config,
                model: candidates[i].model.clone(),
                multiplicity,
            })
            .collect(),
    })
}

/// A classifier with its scaler and provenance, serializable to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub seed: u64,
    pub kind: ModelKind,
    /// Names of the input columns, in order.
    pub features: Vec<String>,
    /// Names of the class labels, indexed by label.
    pub labels: Vec<String>,
    pub scaler: Scaler,
    pub classifier: Classifier,
}

impl TrainedModel {
    pub fn new(seed: u64, features: Vec<String>, labels: Vec<String>, scaler: Scaler, classifier: Classifier) -> Self {
        TrainedModel {
            format_version: FORMAT_VERSION,
            seed,
            kind: classifier.kind(),
            features,
            labels,
            scaler,
            classifier,
        }
    }

    pub fn predict(&self, rows: &[Vec<Option<f64>>]) -> Vec<usize> {
        self.classifier.predict(&self.scaler.transform(rows))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::input(format!(
                "model format version {} is not supported (expected {FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(config: ModelConfig, preds: Vec<usize>, y: &[usize]) -> Candidate {
        Candidate {
            config,
            model: Classifier::Knn(KnnModel {
                k: 1,
                x: vec![vec![0.0]],
                y: vec![0],
            }),
            val_accuracy: accuracy(&preds, y),
            val_predictions: preds,
        }
    }

    #[test]
    fn vote_ties_to_lowest_label() {
        let a = [2usize, 1];
        let b = [1usize, 2];
        assert_eq!(plurality_vote(&[(&a, 1), (&b, 1)], 2), vec![1, 1]);
        assert_eq!(plurality_vote(&[(&a, 2), (&b, 1)], 2), vec![2, 1]);
    }

    #[test]
    fn ensemble_of_complementary_members() {
        let y = vec![0, 1, 2, 0, 1, 2];
        let c = [
            fake(ModelConfig::Knn { k: 1 }, vec![0, 1, 2, 0, 0, 0], &y),
            fake(ModelConfig::Knn { k: 3 }, vec![0, 0, 0, 0, 1, 2], &y),
            fake(ModelConfig::Knn { k: 5 }, vec![1, 1, 2, 2, 1, 2], &y),
        ];
        let sel = greedy_selection(&c, &y, 10).unwrap();
        let best = c.iter().map(|c| c.val_accuracy).fold(0.0, f64::max);
        assert!(sel.val_accuracy >= best);
        let one = greedy_selection(&c[..1], &y, 10).unwrap();
        assert_eq!(one.members, vec![(0, 1)]);
        assert!(greedy_selection(&[], &y, 10).is_err());
    }

    #[test]
    fn perfect_and_random() {
        let y = vec![0, 1, 0, 1, 1, 0];
        let c = [
            fake(ModelConfig::Lda { shrinkage: 0.1 }, vec![1, 1, 1, 0, 1, 1], &y),
            fake(ModelConfig::Lda { shrinkage: 0.3 }, y.clone(), &y),
        ];
        let sel = greedy_selection(&c, &y, 10).unwrap();
        assert_eq!(sel.val_accuracy, 1.0);
        assert_eq!(sel.members, vec![(1, 1)]);
    }

    #[test]
    fn grid_search_ranking() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let ranked = grid_search((&x, &y), (&x, &y), &Grid::default()).unwrap();
        assert_eq!(ranked[0].val_accuracy, 1.0);
        // all perfect on separable data, so the grid order survives
        assert_eq!(ranked[0].config, ModelConfig::Lda { shrinkage: 0.01 });
        let only = Grid {
            lda_shrinkage: vec![],
            knn_k: vec![3],
            adaboost_stumps: vec![],
        };
        let r = grid_search((&x, &y), (&x, &y), &only).unwrap();
        assert_eq!(r.len(), 1);
        assert!(grid_search((&x, &y), (&[], &[]), &only).is_err());
    }

    #[test]
    fn json_round_trip() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i % 5) as f64]).collect();
        let y: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let scaler = Scaler::fit_dense(&x).unwrap();
        let z = scaler.transform_dense(&x);
        let ranked = grid_search((&z, &y), (&z, &y), &Grid::default()).unwrap();
        let ens = greedy_ensemble(&ranked, &y, 10).unwrap();
        let m = TrainedModel::new(7, vec!["a".into(), "b".into()], vec!["easy".into(), "medium".into(), "hard".into()], scaler, Classifier::Ensemble(ens));
        let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let rows: Vec<Vec<Option<f64>>> = x.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect();
        assert_eq!(back.predict(&rows), m.predict(&rows));
    }
}
