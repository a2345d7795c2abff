use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::Scalar;

/// Mean negative log-likelihood `-(1/N) sum ln |<x|Psi>|^2` over `batch`.
///
/// The model must carry an orthogonality center, which guarantees
/// `<Psi|Psi> = 1`. A sample with zero amplitude makes the loss infinite and
/// is reported as [`Error::ZeroAmplitude`].
pub fn nll_loss<T: Scalar>(mps: &Mps<T>, batch: &Dataset) -> Result<T> {
    if mps.ortho_center().is_none() {
        return Err(Error::NoOrthoCenter);
    }
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = T::zero();
    for (k, x) in batch.iter().enumerate() {
        let la = mps.log_amplitude(x)?;
        if la.is_zero() {
            return Err(Error::ZeroAmplitude { sample: k });
        }
        total -= la.log_prob();
    }
    Ok(total / T::of(batch.len() as f64))
}
