//! Mixed-canonical gauge: QR sweeps and center moves.

use nalgebra::DMatrix;

use super::{Mps, SiteTensor, PHYS_DIM};
use crate::error::{Error, Result};
use crate::linalg::{from_row_major, frobenius, thin_qr, to_row_major};
use crate::Scalar;

impl<T: Scalar> Mps<T> {
    /// Bring the chain into mixed-canonical form around `center` and
    /// normalize it.
    ///
    /// Sites left of `center` become left-orthogonal, sites right of it
    /// right-orthogonal, and the center tensor carries unit norm.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        self.check_site(center)?;
        for i in 0..center {
            self.shift_right(i)?;
        }
        for i in (center + 1..self.n_sites()).rev() {
            self.shift_left(i)?;
        }
        let c = &mut self.sites_mut()[center];
        let norm = frobenius(c.data());
        if !(norm > T::tiny()) || !norm.is_finite() {
            return Err(Error::Degenerate("state has zero norm".into()));
        }
        c.data_mut().iter_mut().for_each(|x| *x /= norm);
        self.set_center(Some(center));
        Ok(())
    }

    /// Value-returning form of [`Mps::canonicalize`].
    pub fn canonicalized(&self, center: usize) -> Result<Self> {
        let mut out = self.clone();
        out.canonicalize(center)?;
        Ok(out)
    }

    /// Move an existing orthogonality center to site `to`.
    pub fn move_center(&mut self, to: usize) -> Result<()> {
        self.check_site(to)?;
        let from = self.ortho_center().ok_or(Error::NoOrthoCenter)?;
        for i in from..to {
            self.shift_right(i)?;
        }
        for i in (to + 1..=from).rev() {
            self.shift_left(i)?;
        }
        self.set_center(Some(to));
        Ok(())
    }

    /// QR site `i` (left-grouped) and push the triangular factor into site
    /// `i + 1`. The factor is rescaled to unit norm.
    pub(crate) fn shift_right(&mut self, i: usize) -> Result<()> {
        let sites = self.sites_mut();
        let (l, r) = (sites[i].left(), sites[i].right());
        let (q, mut rf) = thin_qr(l * PHYS_DIM, r, sites[i].data());
        let k = q.ncols();
        let norm = rf.norm();
        if !(norm > T::tiny()) || !norm.is_finite() {
            return Err(Error::Degenerate(format!("zero factor while orthogonalizing site {i}")));
        }
        rf /= norm;
        sites[i] = SiteTensor::new(l, k, to_row_major(&q))?;
        let next = &sites[i + 1];
        let nr = next.right();
        let merged = rf * from_row_major(r, PHYS_DIM * nr, next.data());
        sites[i + 1] = SiteTensor::new(k, nr, to_row_major(&merged))?;
        Ok(())
    }

    /// LQ site `i` (right-grouped) and push the triangular factor into site
    /// `i - 1`. The factor is rescaled to unit norm.
    pub(crate) fn shift_left(&mut self, i: usize) -> Result<()> {
        let sites = self.sites_mut();
        let (l, r) = (sites[i].left(), sites[i].right());
        // transpose of the l x 2r matrix, so that QR yields M = R^T Q^T
        let mt = DMatrix::from_column_slice(PHYS_DIM * r, l, sites[i].data());
        let qr = mt.qr();
        let (q, rf) = (qr.q(), qr.r());
        let k = q.ncols();
        let mut lf = rf.transpose();
        let norm = lf.norm();
        if !(norm > T::tiny()) || !norm.is_finite() {
            return Err(Error::Degenerate(format!("zero factor while orthogonalizing site {i}")));
        }
        lf /= norm;
        sites[i] = SiteTensor::new(k, r, to_row_major(&q.transpose()))?;
        let prev = &sites[i - 1];
        let pl = prev.left();
        let merged = from_row_major(pl * PHYS_DIM, l, prev.data()) * lf;
        sites[i - 1] = SiteTensor::new(pl, k, to_row_major(&merged))?;
        Ok(())
    }

    /// Per-site deviation from the canonical conditions, or `None` without a
    /// center. Left of the center: `max |A^T A - I|` over the left-grouped
    /// reshape; right of it: `max |A A^T - I|` over the right-grouped one; at
    /// the center: `| ||A||^2 - 1 |`.
    pub fn orthogonality_residuals(&self) -> Option<Vec<T>> {
        let c = self.ortho_center()?;
        Some(
            self.sites()
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let (l, r) = (s.left(), s.right());
                    if i < c {
                        let m = from_row_major(l * PHYS_DIM, r, s.data());
                        identity_residual(m.transpose() * m)
                    } else if i > c {
                        let m = from_row_major(l, PHYS_DIM * r, s.data());
                        identity_residual(&m * m.transpose())
                    } else {
                        let n = frobenius(s.data());
                        (n * n - T::one()).abs()
                    }
                })
                .collect(),
        )
    }
}

fn identity_residual<T: Scalar>(g: DMatrix<T>) -> T {
    let mut worst = T::zero();
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { T::one() } else { T::zero() };
            worst = worst.max((g[(r, c)] - target).abs());
        }
    }
    worst
}
