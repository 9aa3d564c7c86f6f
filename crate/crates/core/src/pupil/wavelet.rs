//! Periodized discrete wavelet transform with the 32-tap Symlet-16 filter
//! bank.

use crate::error::{Error, Result};

pub const SYM16_LEN: usize = 32;

/// Symlet-16 decomposition low-pass filter, in convolution order.
pub const SYM16_DEC_LO: [f64; SYM16_LEN] = [
    6.230006701220761e-06,
    -3.113556407621969e-06,
    -0.00010943147929529757,
    2.8078582128442894e-05,
    0.0008523547108047095,
    -0.0001084456223089688,
    -0.0038809122526038786,
    0.0007182119788317892,
    0.012666731659857348,
    -0.0031265171722710075,
    -0.031051202843553064,
    0.004869274404904607,
    0.032333091610663785,
    -0.06698304907021778,
    -0.034574228416972504,
    0.39712293362064416,
    0.7565249878756971,
    0.47534280601152273,
    -0.054040601387606135,
    -0.15959219218520598,
    0.03072113906330156,
    0.07803785290341991,
    -0.003510275068374009,
    -0.024952758046290123,
    0.001359844742484172,
    0.0069377611308027096,
    -0.00022211647621176323,
    -0.0013387206066921965,
    3.656592483348223e-05,
    0.00016545679579108483,
    -5.396483179315242e-06,
    -1.0797982104319795e-05,
];

/// Orthogonal wavelet filter bank used by the pupil features. Only
/// periodized extension is supported.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub name: &'static str,
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
}

impl WaveletSpec {
    pub fn sym16() -> Self {
        let dec_lo = SYM16_DEC_LO.to_vec();
        WaveletSpec {
            name: "sym16",
            dec_hi: quadrature_mirror(&dec_lo),
            dec_lo,
        }
    }

    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }

    /// Deepest useful level for a signal of `n` samples:
    /// `floor(log2(n / (filter_len - 1)))`, or 0 when the signal is shorter
    /// than the filter.
    pub fn max_level(&self, n: usize) -> usize {
        let f = self.filter_len();
        if f < 2 || n < f - 1 {
            return 0;
        }
        let mut level = 0;
        while (f - 1) << (level + 1) <= n {
            level += 1;
        }
        level
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec::sym16()
    }
}

/// `hi[k] = (-1)^(k+1) * lo[L-1-k]`.
pub fn quadrature_mirror(lo: &[f64]) -> Vec<f64> {
    let l = lo.len();
    (0..l)
        .map(|k| {
            let v = lo[l - 1 - k];
            if k % 2 == 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// One analysis step: convolve with `filter` over the periodic extension
/// and keep every second output. Odd-length input is first padded by
/// repeating its last sample, so the output has `ceil(n / 2)` entries.
pub fn analysis_step(signal: &[f64], filter: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let padded = n + n % 2;
    let f = filter.len();
    let at = |idx: usize| -> f64 {
        if idx < n {
            signal[idx]
        } else {
            signal[n - 1]
        }
    };
    (0..padded / 2)
        .map(|o| {
            let center = f / 2 + 2 * o;
            filter
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let idx = (center + padded * f - j) % padded;
                    c * at(idx)
                })
                .sum()
        })
        .collect()
}

/// Approximation and detail coefficients of one decomposition level.
pub fn dwt_single(signal: &[f64], spec: &WaveletSpec) -> (Vec<f64>, Vec<f64>) {
    (
        analysis_step(signal, &spec.dec_lo),
        analysis_step(signal, &spec.dec_hi),
    )
}

/// Detail coefficients at `level` (1-based): `level - 1` low-pass steps
/// followed by one high-pass step.
pub fn dwt_detail(signal: &[f64], level: usize, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if level == 0 {
        return Err(Error::input("wavelet level must be at least 1"));
    }
    if level >= usize::BITS as usize || signal.len() < (1usize << level) {
        return Err(Error::input(format!(
            "signal of length {} too short for wavelet level {level}",
            signal.len()
        )));
    }
    let mut approx = signal.to_vec();
    for _ in 1..level {
        approx = analysis_step(&approx, &spec.dec_lo);
    }
    Ok(analysis_step(&approx, &spec.dec_hi))
}
