//! Linear discriminant analysis with a shrunken pooled covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{class_list, check_xy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub shrinkage: f64,
    pub classes: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub priors: Vec<f64>,
    /// `Sigma^-1 mu_c` per class.
    pub coef: Vec<Vec<f64>>,
    /// `-0.5 mu_c' Sigma^-1 mu_c + ln pi_c` per class.
    pub intercept: Vec<f64>,
}

pub fn fit_lda(x: &[Vec<f64>], y: &[usize], shrinkage: f64) -> Result<LdaModel> {
    let p = check_xy(x, y)?;
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::input("LDA shrinkage must lie in [0, 1]"));
    }
    let classes = class_list(y);
    if classes.len() < 2 {
        return Err(Error::input("LDA needs at least 2 classes"));
    }
    let n = x.len();
    let mut means = vec![vec![0.0; p]; classes.len()];
    let mut counts = vec![0usize; classes.len()];
    let class_of: Vec<usize> = y.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    for (row, &c) in x.iter().zip(&class_of) {
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        for v in m.iter_mut() {
            *v /= cnt as f64;
        }
    }

    let mut cov = DMatrix::<f64>::zeros(p, p);
    for (row, &c) in x.iter().zip(&class_of) {
        let d = DVector::from_iterator(p, row.iter().zip(&means[c]).map(|(v, m)| v - m));
        cov += &d * d.transpose();
    }
    let dof = n - classes.len();
    if dof > 0 {
        cov /= dof as f64;
    }
    let trace = cov.trace();
    let nu = if trace > 0.0 { trace / p as f64 } else { 1.0 };
    let shrunk = cov * (1.0 - shrinkage) + DMatrix::<f64>::identity(p, p) * (shrinkage * nu);
    let chol = shrunk.cholesky().ok_or_else(|| {
        Error::Numerical("singular LDA covariance; use a shrinkage above 0".to_string())
    })?;

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut coef = Vec::with_capacity(classes.len());
    let mut intercept = Vec::with_capacity(classes.len());
    for (m, prior) in means.iter().zip(&priors) {
        let mu = DVector::from_column_slice(m);
        let w = chol.solve(&mu);
        intercept.push(-0.5 * mu.dot(&w) + prior.ln());
        coef.push(w.iter().copied().collect());
    }
    Ok(LdaModel {
        shrinkage,
        classes,
        means,
        priors,
        coef,
        intercept,
    })
}

impl LdaModel {
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.coef
            .iter()
            .zip(&self.intercept)
            .map(|(w, b)| w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub fn predict_one(&self, row: &[f64]) -> usize {
        self.classes[argmax(&self.scores(row))]
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Index of the largest value; the earliest wins ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in v.iter().enumerate().skip(1) {
        if *s > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn two_gaussians(n: usize, mu: f64, sd: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let center = if c == 0 { -mu } else { mu };
            x.push(vec![center + noise.sample(&mut rng)]);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separated_classes() {
        let (x, y) = two_gaussians(100, 5.0, 0.1, 1);
        let m = fit_lda(&x, &y, 0.1).unwrap();
        let (tx, ty) = two_gaussians(400, 5.0, 0.1, 2);
        let acc = m.predict(&tx).iter().zip(&ty).filter(|(a, b)| a == b).count() as f64 / 400.0;
        assert!(acc >= 0.99);
    }

    #[test]
    fn no_signal_near_chance() {
        let mut total = 0.0;
        for seed in 0..20 {
            let (x, y) = two_gaussians(60, 0.0, 1.0, seed);
            let m = fit_lda(&x, &y, 0.3).unwrap();
            let (tx, ty) = two_gaussians(200, 0.0, 1.0, seed + 100);
            total += m.predict(&tx).iter().zip(&ty).filter(|(a, b)| a == b).count() as f64 / 200.0;
        }
        assert!((total / 20.0 - 0.5).abs() < 0.06);
    }

    #[test]
    fn single_point_per_class_is_nearest_mean() {
        let x = vec![vec![0.0, 0.0], vec![3.0, 1.0], vec![-1.0, 4.0]];
        let y = vec![0, 1, 2];
        let m = fit_lda(&x, &y, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let q = vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let d: Vec<f64> = x.iter().map(|c| c.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).collect();
            let nearest = (0..3).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
            assert_eq!(m.predict_one(&q), nearest, "{q:?}");
        }
    }

    #[test]
    fn singular_without_shrinkage() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 1.0], vec![3.0, 1.0]];
        let y = vec![0, 0, 1, 1];
        let err = fit_lda(&x, &y, 0.0).unwrap_err();
        assert!(err.to_string().contains("shrinkage"));
        assert!(fit_lda(&x, &y, 0.01).is_ok());
        assert!(fit_lda(&x, &[0, 0, 0, 0], 0.5).is_err());
    }

    #[test]
    fn argmax_shift_invariant() {
        let v = [0.3, 2.0, 2.0, -1.0];
        assert_eq!(argmax(&v), 1);
        let shifted: Vec<f64> = v.iter().map(|s| s + 17.0).collect();
        assert_eq!(argmax(&shifted), 1);
    }
}
