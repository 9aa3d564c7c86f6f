//! Pupillometry: preprocessing, wavelet machinery and LHIPA.

pub mod lhipa;
pub mod preprocess;
pub mod wavelet;

pub use lhipa::{lhipa, modulus_maxima, LhipaOutcome};
pub use preprocess::{preprocess_pupil, PupilUnusable, UniformPupilSignal, DEFAULT_PUPIL_RATE_HZ};
pub use wavelet::{dwt_detail, dwt_single, WaveletSpec};

use crate::model::PupilSample;

/// Preprocesses one eye and computes its LHIPA, or explains why it is
/// missing.
pub fn eye_lhipa(raw: &[PupilSample], spec: &WaveletSpec, rate_hz: f64) -> Result<f64, String> {
    let signal = preprocess_pupil(raw, rate_hz).map_err(|e| e.to_string())?;
    let out = lhipa(&signal, spec).map_err(|e| e.to_string())?;
    if out.degenerate_high_band {
        return Err("high-frequency pupil band vanished".to_string());
    }
    Ok(out.value)
}
