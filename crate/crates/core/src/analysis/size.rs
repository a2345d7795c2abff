use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Size of the full set of images a model recognizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSetSize {
    /// `E0 / ln 2`, the leading estimate in bits.
    pub v_bits: f64,
    /// Leading estimate of `ln N_F`, equal to `E0`.
    pub ln_nf_leading: f64,
    /// `E0 + ln(rho(E0) * dE)`.
    pub ln_nf: f64,
    pub correction: f64,
    /// `ln_nf / ln 2`.
    pub v_corrected_bits: f64,
    pub delta_e: f64,
    pub epsilon_star: Option<f64>,
}

/// Set size from `E0`, the sampled energy density at `E0`, and the width
/// `delta_e` of the energy band counted as neat.
pub fn full_set_size(e0: f64, rho_at_e0: f64, delta_e: f64) -> Result<FullSetSize> {
    if !(rho_at_e0 > 0.0 && rho_at_e0.is_finite()) {
        return Err(Error::InvalidArgument(format!("density at E0 must be positive, got {rho_at_e0}")));
    }
    if !(delta_e > 0.0 && delta_e.is_finite()) {
        return Err(Error::InvalidArgument(format!("energy width must be positive, got {delta_e}")));
    }
    if !e0.is_finite() {
        return Err(Error::InvalidArgument(format!("E0 must be finite, got {e0}")));
    }
    let correction = (rho_at_e0 * delta_e).ln();
    let ln_nf = e0 + correction;
    Ok(FullSetSize {
        v_bits: e0 / std::f64::consts::LN_2,
        ln_nf_leading: e0,
        ln_nf,
        correction,
        v_corrected_bits: ln_nf / std::f64::consts::LN_2,
        delta_e,
        epsilon_star: None,
    })
}

impl FullSetSize {
    pub fn with_threshold(mut self, epsilon_star: f64) -> Self {
        self.epsilon_star = Some(epsilon_star);
        self
    }
}
