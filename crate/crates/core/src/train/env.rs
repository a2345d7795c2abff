//! Per-sample boundary vectors: the chain contracted against `|x>` on one
//! side of a block of sites, kept at unit norm.

use crate::mps::{normalize_in_place, Mps};
use crate::Scalar;

/// Contraction of sites `0..site` against `bits`, normalized.
///
/// Returns the vector and the log of the discarded scale; a zero vector
/// reports a log-scale of `-inf`.
pub(crate) fn left_env<T: Scalar>(mps: &Mps<T>, site: usize, bits: &[u8]) -> (Vec<T>, T) {
    let mut v = vec![T::one()];
    let mut next = Vec::new();
    let mut log_scale = T::zero();
    for (s, &b) in mps.sites()[..site].iter().zip(bits) {
        next.resize(s.right(), T::zero());
        s.apply_left(&v, b as usize, &mut next);
        std::mem::swap(&mut v, &mut next);
        log_scale += normalize_in_place(&mut v).ln();
    }
    (v, log_scale)
}

/// Contraction of sites `site + 1..n` against `bits`, normalized.
pub(crate) fn right_env<T: Scalar>(mps: &Mps<T>, site: usize, bits: &[u8]) -> (Vec<T>, T) {
    let mut w = vec![T::one()];
    let mut next = Vec::new();
    let mut log_scale = T::zero();
    for j in (site + 1..mps.n_sites()).rev() {
        let s = mps.site(j);
        next.resize(s.left(), T::zero());
        s.apply_right(&w, bits[j] as usize, &mut next);
        std::mem::swap(&mut w, &mut next);
        log_scale += normalize_in_place(&mut w).ln();
    }
    (w, log_scale)
}
