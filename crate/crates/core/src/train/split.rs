use nalgebra::{DMatrix, DVector};

use super::merged::MergedTensor;
use crate::error::{Error, Result};
use crate::linalg::{from_row_major, svd_sorted, to_row_major};
use crate::mps::{SiteTensor, PHYS_DIM};
use crate::Scalar;

/// Which of the two new tensors receives the singular values and becomes the
/// orthogonality center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome<T> {
    pub left: SiteTensor<T>,
    pub right: SiteTensor<T>,
    /// Kept singular values after renormalization.
    pub kept: Vec<T>,
    /// Sum of squares of the discarded singular values, before renormalization.
    pub discarded_weight: T,
}

/// Factor a merged tensor back into two site tensors by SVD.
///
/// At most `bond_cap` singular values are kept, and any below
/// `cutoff * largest` are dropped. The kept spectrum is rescaled to unit norm.
pub fn split_truncate<T: Scalar>(
    merged: &MergedTensor<T>,
    side: CenterSide,
    bond_cap: usize,
    cutoff: T,
) -> Result<SplitOutcome<T>> {
    if bond_cap == 0 {
        return Err(Error::InvalidArgument("bond cap must be positive".into()));
    }
    let (l, r) = (merged.left, merged.right);
    let svd = svd_sorted(from_row_major(l * PHYS_DIM, PHYS_DIM * r, &merged.data))?;
    let largest = svd.s.first().copied().unwrap_or_else(T::zero);
    if !(largest > T::zero()) {
        return Err(Error::Degenerate("all singular values vanish".into()));
    }
    let floor = cutoff * largest;
    let keep = svd.s.iter().take(bond_cap).take_while(|&&s| s > floor || s == largest).count().max(1);
    let discarded_weight = svd.s[keep..].iter().fold(T::zero(), |acc, &s| acc + s * s);
    let kept_norm = svd.s[..keep].iter().fold(T::zero(), |acc, &s| acc + s * s).sqrt();
    let kept: Vec<T> = svd.s[..keep].iter().map(|&s| s / kept_norm).collect();

    let u = svd.u.columns(0, keep).into_owned();
    let vt = svd.vt.rows(0, keep).into_owned();
    let sdiag = DMatrix::from_diagonal(&DVector::from_vec(kept.clone()));
    let (lm, rm) = match side {
        CenterSide::Right => (u, sdiag * vt),
        CenterSide::Left => (u * sdiag, vt),
    };
    Ok(SplitOutcome {
        left: SiteTensor::new(l, keep, to_row_major(&lm))?,
        right: SiteTensor::new(keep, r, to_row_major(&rm))?,
        kept,
        discarded_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contract(a: &SiteTensor<f64>, b: &SiteTensor<f64>) -> Vec<f64> {
        let (l, m, r) = (a.left(), a.right(), b.right());
        let mut out = vec![0.0; l * 4 * r];
        for al in 0..l {
            for s1 in 0..2 {
                for s2 in 0..2 {
                    for br in 0..r {
                        out[((al * 2 + s1) * 2 + s2) * r + br] =
                            (0..m).map(|k| a.get(al, s1, k) * b.get(k, s2, br)).sum();
                    }
                }
            }
        }
        out
    }

    #[test]
    fn rank_one_is_exact() {
        // outer product of (1, 2) x (3, -1, 0.5, 2) reshaped to (1, 2, 2, 2)
        let u = [1.0, 2.0];
        let v = [3.0, -1.0, 0.5, 2.0];
        let data: Vec<f64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
        let data: Vec<f64> = data.iter().map(|x| x / norm).collect();
        let m = MergedTensor::new(1, 2, data.clone()).unwrap();
        for side in [CenterSide::Left, CenterSide::Right] {
            let out = split_truncate(&m, side, 4, 1e-12).unwrap();
            assert_eq!(out.kept.len(), 1);
            let back = contract(&out.left, &out.right);
            let err: f64 = back.iter().zip(&data).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(err < 1e-28, "{err}");
        }
    }

    #[test]
    fn zero_tensor_is_degenerate() {
        let m = MergedTensor::new(1, 1, vec![0.0; 4]).unwrap();
        assert!(matches!(split_truncate(&m, CenterSide::Left, 2, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn center_side_gets_the_weights() {
        let data: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let m = MergedTensor::new(2, 2, data).unwrap();
        let out = split_truncate(&m, CenterSide::Right, 4, 0.0).unwrap();
        // left factor is an isometry over its (left * 2) rows
        let l = &out.left;
        for c1 in 0..l.right() {
            for c2 in 0..l.right() {
                let g: f64 = (0..l.left()).flat_map(|a| (0..2).map(move |s| (a, s))).map(|(a, s)| l.get(a, s, c1) * l.get(a, s, c2)).sum();
                assert!((g - if c1 == c2 { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
