//! Schmidt decomposition across a bond and the resulting entanglement entropy.

use nalgebra::{DMatrix, DVector};

use super::{Mps, SiteTensor, PHYS_DIM};
use crate::error::{Error, Result};
use crate::linalg::{from_row_major, svd_sorted, to_row_major};
use crate::Scalar;

/// A cut of the chain into the first `cut_k` sites and the remaining ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    cut_k: usize,
}

impl Bipartition {
    pub fn new(cut_k: usize, n_sites: usize) -> Result<Self> {
        if cut_k == 0 || cut_k >= n_sites {
            return Err(Error::InvalidArgument(format!(
                "cut {cut_k} must lie in 1..={} for {n_sites} sites",
                n_sites.saturating_sub(1)
            )));
        }
        Ok(Self { cut_k })
    }

    pub fn cut_k(&self) -> usize {
        self.cut_k
    }
}

/// Schmidt coefficients, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> SchmidtSpectrum<T> {
    pub fn entropy(&self) -> T {
        entanglement_entropy(self)
    }

    pub fn sum_of_squares(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &l| acc + l * l)
    }
}

/// Von Neumann entropy `-sum l^2 ln l^2` in nats; zero coefficients contribute 0.
pub fn entanglement_entropy<T: Scalar>(spectrum: &SchmidtSpectrum<T>) -> T {
    spectrum.values.iter().fold(T::zero(), |acc, &l| {
        let p = l * l;
        if p > T::zero() {
            acc - p * p.ln()
        } else {
            acc
        }
    })
}

impl<T: Scalar> Mps<T> {
    /// Schmidt coefficients across `cut`, read from the singular values of
    /// the center tensor once the center sits just left of the cut.
    pub fn schmidt_spectrum(&self, cut: Bipartition) -> Result<SchmidtSpectrum<T>> {
        if cut.cut_k() >= self.n_sites() {
            return Err(Error::InvalidArgument(format!("cut {} beyond chain", cut.cut_k())));
        }
        let site = cut.cut_k() - 1;
        let mut work = self.clone();
        match work.ortho_center() {
            Some(_) => work.move_center(site)?,
            None => work.canonicalize(site)?,
        }
        let s = work.site(site);
        let svd = svd_sorted(from_row_major(s.left() * PHYS_DIM, s.right(), s.data()))?;
        Ok(SchmidtSpectrum { values: svd.s })
    }

    /// Spectra for every cut `k = 1..n-1` from a single left-to-right SVD sweep.
    pub fn all_schmidt_spectra(&self) -> Result<Vec<SchmidtSpectrum<T>>> {
        let mut work = self.clone();
        match work.ortho_center() {
            Some(_) => work.move_center(0)?,
            None => work.canonicalize(0)?,
        }
        let n = work.n_sites();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for k in 1..n {
            let sites = work.sites_mut();
            let (l, r) = (sites[k - 1].left(), sites[k - 1].right());
            let svd = svd_sorted(from_row_major(l * PHYS_DIM, r, sites[k - 1].data()))?;
            let m = svd.s.len();
            sites[k - 1] = SiteTensor::new(l, m, to_row_major(&svd.u))?;
            let sv = DMatrix::from_diagonal(&DVector::from_vec(svd.s.clone())) * &svd.vt;
            let next = &sites[k];
            let nr = next.right();
            let merged = sv * from_row_major(r, PHYS_DIM * nr, next.data());
            sites[k] = SiteTensor::new(m, nr, to_row_major(&merged))?;
            out.push(SchmidtSpectrum { values: svd.s });
        }
        Ok(out)
    }
}
