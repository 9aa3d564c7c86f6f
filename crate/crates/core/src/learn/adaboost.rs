//! Discrete AdaBoost with decision stumps; one-vs-rest for more than two
//! classes.

use serde::{Deserialize, Serialize};

use super::{check_xy, class_list, lda::argmax};
use crate::error::{Error, Result};

const EPS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// +1 predicts the positive class above the threshold, -1 below it.
    pub polarity: i8,
    pub alpha: f64,
}

impl Stump {
    fn vote(&self, row: &[f64]) -> f64 {
        let above = row[self.feature] > self.threshold;
        let s = if above { 1.0 } else { -1.0 };
        s * self.polarity as f64
    }
}

/// A single boosted binary machine over labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedMachine {
    pub stumps: Vec<Stump>,
}

impl BoostedMachine {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.alpha * s.vote(row)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub n_stumps: usize,
    pub classes: Vec<usize>,
    /// One machine for two classes (positive = `classes[1]`), otherwise one
    /// per class.
    pub machines: Vec<BoostedMachine>,
}

/// Lowest weighted error stump. Thresholds are midpoints between distinct
/// sorted values; ties prefer the lower feature, the lower threshold and
/// polarity +1.
fn best_stump(x: &[Vec<f64>], t: &[f64], w: &[f64]) -> Option<(Stump, f64)> {
    let p = x[0].len();
    let total: f64 = w.iter().sum();
    let mut best: Option<(Stump, f64)> = None;
    for j in 0..p {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a][j].total_cmp(&x[b][j]).then(a.cmp(&b)));
        // error of polarity +1 with the threshold below every value: all
        // rows predicted +1, so every negative row is wrong
        let mut err_pos: f64 = order.iter().filter(|&&i| t[i] < 0.0).map(|&i| w[i]).sum();
        let mut k = 0;
        while k < order.len() {
            let v = x[order[k]][j];
            while k < order.len() && x[order[k]][j] == v {
                let i = order[k];
                // row moves below the threshold and is now predicted -1
                err_pos += if t[i] > 0.0 { w[i] } else { -w[i] };
                k += 1;
            }
            if k == order.len() {
                break;
            }
            let threshold = (v + x[order[k]][j]) / 2.0;
            for (polarity, err) in [(1i8, err_pos), (-1i8, total - err_pos)] {
                let better = best.as_ref().is_none_or(|(_, e)| err < *e);
                if better {
                    best = Some((
                        Stump {
                            feature: j,
                            threshold,
                            polarity,
                            alpha: 0.0,
                        },
                        err,
                    ));
                }
            }
        }
    }
    best.map(|(s, e)| (s, (e / total).max(0.0)))
}

fn boost(x: &[Vec<f64>], t: &[f64], n_stumps: usize) -> BoostedMachine {
    let n = x.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    for _ in 0..n_stumps {
        let Some((mut stump, raw_err)) = best_stump(x, t, &w) else {
            break;
        };
        if raw_err >= 0.5 {
            break;
        }
        let eps = raw_err.clamp(EPS_FLOOR, 1.0 - EPS_FLOOR);
        stump.alpha = 0.5 * ((1.0 - eps) / eps).ln();
        for i in 0..n {
            w[i] *= (-stump.alpha * t[i] * stump.vote(&x[i])).exp();
        }
        let z: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= z;
        }
        stumps.push(stump);
        if raw_err <= 0.0 {
            break;
        }
    }
    BoostedMachine { stumps }
}

pub fn fit_adaboost(x: &[Vec<f64>], y: &[usize], n_stumps: usize) -> Result<AdaBoostModel> {
    check_xy(x, y)?;
    if x.len() < 2 {
        return Err(Error::input("AdaBoost needs at least 2 samples"));
    }
    if n_stumps == 0 {
        return Err(Error::input("AdaBoost needs at least one stump"));
    }
    let classes = class_list(y);
    if classes.len() < 2 {
        return Err(Error::input("AdaBoost needs at least 2 classes"));
    }
    let target = |positive: usize| -> Vec<f64> {
        y.iter().map(|&l| if l == positive { 1.0 } else { -1.0 }).collect()
    };
    let machines = if classes.len() == 2 {
        vec![boost(x, &target(classes[1]), n_stumps)]
    } else {
        classes.iter().map(|&c| boost(x, &target(c), n_stumps)).collect()
    };
    Ok(AdaBoostModel {
        n_stumps,
        classes,
        machines,
    })
}

impl AdaBoostModel {
    pub fn predict_one(&self, row: &[f64]) -> usize {
        if self.classes.len() == 2 {
            let m = self.machines[0].margin(row);
            return if m > 0.0 { self.classes[1] } else { self.classes[0] };
        }
        let margins: Vec<f64> = self.machines.iter().map(|m| m.margin(row)).collect();
        self.classes[argmax(&margins)]
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter().map(|r| self.predict_one(r)).collect()
    }
}
