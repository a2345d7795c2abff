//! Thin wrappers over nalgebra factorizations with row-major buffers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

pub(crate) fn from_row_major<T: Scalar>(rows: usize, cols: usize, data: &[T]) -> DMatrix<T> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn to_row_major<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

pub(crate) fn frobenius<T: Scalar>(data: &[T]) -> T {
    data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Thin QR of a `rows x cols` row-major matrix: returns `(Q, R)` with
/// `Q: rows x k`, `R: k x cols`, `k = min(rows, cols)`.
pub(crate) fn thin_qr<T: Scalar>(rows: usize, cols: usize, data: &[T]) -> (DMatrix<T>, DMatrix<T>) {
    let qr = from_row_major(rows, cols, data).qr();
    (qr.q(), qr.r())
}

/// Singular value decomposition with singular values sorted descending.
pub(crate) struct SortedSvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<T>,
    pub vt: DMatrix<T>,
}

pub(crate) fn svd_sorted<T: Scalar>(m: DMatrix<T>) -> Result<SortedSvd<T>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite entries in SVD input".into()));
    }
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Internal("SVD did not return U".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Internal("SVD did not return V^T".into()))?;
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let s = order.iter().map(|&i| sv[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    Ok(SortedSvd { u, s, vt })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 2, &[0.1, 0.0, 0.0, 3.0, 1.0, 1.0]);
        let svd = svd_sorted(m.clone()).unwrap();
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        let back = &svd.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.s.clone())) * &svd.vt;
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn row_major_round_trip() {
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m = from_row_major(2, 3, &data);
        assert_eq!(m[(0, 2)], 3.0);
        assert_eq!(to_row_major(&m), data.to_vec());
    }
}
