use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-scoring learned from training rows. Missing entries are
/// imputed with the training mean before scaling, which maps them to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<Option<f64>>]) -> Result<Scaler> {
        let first = rows.first().ok_or_else(|| Error::input("cannot fit a scaler on zero rows"))?;
        let p = first.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::input("rows differ in length"));
        }
        let mut mean = vec![0.0; p];
        let mut std = vec![1.0; p];
        for j in 0..p {
            let col: Vec<f64> = rows.iter().filter_map(|r| r[j]).filter(|v| v.is_finite()).collect();
            if col.is_empty() {
                continue;
            }
            let m = col.iter().sum::<f64>() / col.len() as f64;
            mean[j] = m;
            if col.len() > 1 {
                let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (col.len() - 1) as f64).sqrt();
                if s > 0.0 {
                    std[j] = s;
                }
            }
        }
        Ok(Scaler { mean, std })
    }

    /// Convenience for complete data.
    pub fn fit_dense(rows: &[Vec<f64>]) -> Result<Scaler> {
        let wrapped: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect();
        Scaler::fit(&wrapped)
    }

    pub fn transform_row(&self, row: &[Option<f64>]) -> Vec<f64> {
        assert_eq!(row.len(), self.mean.len(), "row width differs from the scaler");
        row.iter()
            .enumerate()
            .map(|(j, v)| match v.filter(|x| x.is_finite()) {
                Some(x) => (x - self.mean[j]) / self.std[j],
                None => 0.0,
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn transform_dense(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().enumerate().map(|(j, x)| (x - self.mean[j]) / self.std[j]).collect())
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, z)| z * self.std[j] + self.mean[j]).collect()
    }
}
