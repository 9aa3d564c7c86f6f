use serde::{Deserialize, Serialize};

use super::check_xy;
use crate::error::{Error, Result};

/// k-nearest neighbors over stored (standardized) training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

pub fn fit_knn(x: &[Vec<f64>], y: &[usize], k: usize) -> Result<KnnModel> {
    check_xy(x, y)?;
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > x.len() {
        return Err(Error::input(format!("k = {k} exceeds {} training rows", x.len())));
    }
    Ok(KnnModel {
        k,
        x: x.to_vec(),
        y: y.to_vec(),
    })
}

impl KnnModel {
    /// Majority vote of the `k` nearest rows. Equal distances keep training
    /// order; a vote tie goes to the tied class whose member is nearest.
    pub fn predict_one(&self, row: &[f64]) -> usize {
        let mut order: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbors = &order[..self.k];
        // (votes, rank of nearest member) per class, in first-seen order
        let mut tally: Vec<(usize, usize, usize)> = Vec::new();
        for (rank, &(_, i)) in neighbors.iter().enumerate() {
            let label = self.y[i];
            match tally.iter_mut().find(|t| t.0 == label) {
                Some(t) => t.1 += 1,
                None => tally.push((label, 1, rank)),
            }
        }
        tally
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
            .map(|t| t.0)
            .expect("k >= 1")
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter().map(|r| self.predict_one(r)).collect()
    }
}
