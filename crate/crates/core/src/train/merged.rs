use crate::mps::{Mps, PHYS_DIM};
use crate::error::{Error, Result};
use crate::Scalar;

/// The contraction of two neighbouring site tensors, shape `(left, 2, 2, right)`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedTensor<T> {
    pub left: usize,
    pub right: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> MergedTensor<T> {
    pub fn new(left: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != left * PHYS_DIM * PHYS_DIM * right {
            return Err(Error::Shape(format!(
                "merged tensor ({left}, 2, 2, {right}) cannot hold {} entries",
                data.len()
            )));
        }
        Ok(Self { left, right, data })
    }

    /// Contract sites `site` and `site + 1` of `mps`.
    pub fn from_mps(mps: &Mps<T>, site: usize) -> Result<Self> {
        if site + 1 >= mps.n_sites() {
            return Err(Error::SiteOutOfRange { site: site + 1, n_sites: mps.n_sites() });
        }
        let (a, b) = (mps.site(site), mps.site(site + 1));
        let (l, m, r) = (a.left(), a.right(), b.right());
        let mut data = vec![T::zero(); l * 4 * r];
        for al in 0..l {
            for s1 in 0..PHYS_DIM {
                let arow = a.row(al, s1);
                for s2 in 0..PHYS_DIM {
                    let out = &mut data[((al * 2 + s1) * 2 + s2) * r..][..r];
                    for (k, &ak) in arow.iter().enumerate().take(m) {
                        if ak == T::zero() {
                            continue;
                        }
                        for (o, &bv) in out.iter_mut().zip(b.row(k, s2)) {
                            *o += ak * bv;
                        }
                    }
                }
            }
        }
        Ok(Self { left: l, right: r, data })
    }

    /// Row `(a, s1, s2, :)`.
    #[inline]
    pub fn row(&self, a: usize, s1: usize, s2: usize) -> &[T] {
        let start = ((a * 2 + s1) * 2 + s2) * self.right;
        &self.data[start..start + self.right]
    }

    pub fn norm(&self) -> T {
        crate::linalg::frobenius(&self.data)
    }
}
