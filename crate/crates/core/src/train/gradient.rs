//! Gradient of the likelihood objective with respect to a merged pair of sites.
//!
//! With the orthogonality center inside the block, `<Psi|Psi> = ||M||^2`, and
//! the objective `<Psi|Psi> - (1/N) sum ln <x|Psi>^2` has gradient
//!
//! ```text
//! dL/dM = 2 M - (2/N) sum_x  L_x (x) e_{x_i} (x) e_{x_{i+1}} (x) R_x / <x|Psi>
//! ```
//!
//! where `L_x`, `R_x` are the chain contracted against `x` left and right of
//! the block. Both boundary vectors may be rescaled freely: the ratio
//! `L_x R_x / <x|Psi>` is invariant, so they are kept at unit norm.

use super::env::{left_env, right_env};
use super::merged::MergedTensor;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mps::{dot, Mps};
use crate::Scalar;

/// Accumulate `sum_k l_k (x) e_{s1} (x) e_{s2} (x) r_k / psi_k` into `acc`.
///
/// `left` and `right` hold one boundary vector per sample, `merged.left` and
/// `merged.right` entries each. `samples` yields `(sample id, s1, s2, slot)`,
/// where `slot` indexes the boundary buffers.
pub(crate) fn accumulate_inverse_amplitudes<T: Scalar>(
    merged: &MergedTensor<T>,
    left: &[T],
    right: &[T],
    samples: impl Iterator<Item = (usize, usize, usize, usize)>,
    acc: &mut [T],
) -> Result<()> {
    let (l, r) = (merged.left, merged.right);
    let mut t = vec![T::zero(); l];
    for (id, s1, s2, slot) in samples {
        let lv = &left[slot * l..(slot + 1) * l];
        let rv = &right[slot * r..(slot + 1) * r];
        for (a, ta) in t.iter_mut().enumerate() {
            *ta = dot(merged.row(a, s1, s2), rv);
        }
        let psi = dot(lv, &t);
        if psi == T::zero() || !psi.is_finite() {
            return Err(Error::ZeroAmplitude { sample: id });
        }
        let inv = T::one() / psi;
        for (a, &la) in lv.iter().enumerate() {
            let w = la * inv;
            if w == T::zero() {
                continue;
            }
            let start = ((a * 2 + s1) * 2 + s2) * r;
            for (g, &rb) in acc[start..start + r].iter_mut().zip(rv) {
                *g += w * rb;
            }
        }
    }
    Ok(())
}

/// `2 M - (2 / n) acc`, in place over `acc`.
pub(crate) fn finish_gradient<T: Scalar>(merged: &MergedTensor<T>, acc: &mut [T], n: usize) {
    let two = T::of(2.0);
    let scale = two / T::of(n as f64);
    for (g, &m) in acc.iter_mut().zip(&merged.data) {
        *g = two * m - scale * *g;
    }
}

/// Gradient of the objective with respect to the merged tensor of sites
/// `site` and `site + 1`, evaluated on `batch`.
///
/// The orthogonality center must sit on one of the two sites.
pub fn two_site_gradient<T: Scalar>(
    mps: &Mps<T>,
    site: usize,
    batch: &Dataset,
) -> Result<MergedTensor<T>> {
    let n = mps.n_sites();
    if site + 1 >= n {
        return Err(Error::SiteOutOfRange { site: site + 1, n_sites: n });
    }
    match mps.ortho_center() {
        Some(c) if c == site || c == site + 1 => {}
        Some(c) => {
            return Err(Error::InvalidArgument(format!(
                "orthogonality center {c} is not on bond ({site}, {})",
                site + 1
            )))
        }
        None => return Err(Error::NoOrthoCenter),
    }
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let merged = MergedTensor::from_mps(mps, site)?;
    let mut left = Vec::with_capacity(batch.len() * merged.left);
    let mut right = Vec::with_capacity(batch.len() * merged.right);
    for x in batch {
        mps.check_bits(x.bits())?;
        left.extend(left_env(mps, site, x.bits()).0);
        right.extend(right_env(mps, site + 1, x.bits()).0);
    }
    let mut acc = vec![T::zero(); merged.data.len()];
    accumulate_inverse_amplitudes(
        &merged,
        &left,
        &right,
        batch
            .iter()
            .enumerate()
            .map(|(k, x)| (k, x.bits()[site] as usize, x.bits()[site + 1] as usize, k)),
        &mut acc,
    )?;
    finish_gradient(&merged, &mut acc, batch.len());
    MergedTensor::new(merged.left, merged.right, acc)
}
