//! Open-boundary matrix product states over binary sites.
//!
//! A state on `n` sites is a chain of rank-3 tensors `A[i]` of shape
//! `(left_i, 2, right_i)` with `left_0 = right_{n-1} = 1`. The amplitude of a
//! bit string `x` is the matrix product `A[0][x_0] A[1][x_1] ... A[n-1][x_{n-1}]`.
//!
//! Site tensors are stored row-major, so the entry `(a, s, b)` lives at
//! `(a * 2 + s) * right + b`. Read as a `(left * 2) x right` matrix this is the
//! left-grouped reshape; read as `left x (2 * right)` it is the right-grouped one.

mod canonical;
mod entropy;
mod io;

pub use entropy::{entanglement_entropy, Bipartition, SchmidtSpectrum};
pub use io::{MPSW_MAGIC, MPSW_VERSION};

use rand::Rng;

use crate::data::BinaryImage;
use crate::error::{Error, Result};
use crate::Scalar;

/// Physical dimension of every site.
pub const PHYS_DIM: usize = 2;

/// One rank-3 site tensor of shape `(left, 2, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor<T> {
    left: usize,
    right: usize,
    data: Vec<T>,
}

impl<T: Scalar> SiteTensor<T> {
    pub fn new(left: usize, right: usize, data: Vec<T>) -> Result<Self> {
        if left == 0 || right == 0 || data.len() != left * PHYS_DIM * right {
            return Err(Error::Shape(format!(
                "site tensor ({left}, 2, {right}) cannot hold {} entries",
                data.len()
            )));
        }
        Ok(Self { left, right, data })
    }

    pub fn zeros(left: usize, right: usize) -> Self {
        Self { left, right, data: vec![T::zero(); left * PHYS_DIM * right] }
    }

    #[inline]
    pub fn left(&self) -> usize {
        self.left
    }

    #[inline]
    pub fn right(&self) -> usize {
        self.right
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, a: usize, s: usize, b: usize) -> T {
        self.data[(a * PHYS_DIM + s) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, s: usize, b: usize, v: T) {
        self.data[(a * PHYS_DIM + s) * self.right + b] = v;
    }

    /// Row `a` of the matrix selected by physical index `s`.
    #[inline]
    pub fn row(&self, a: usize, s: usize) -> &[T] {
        let start = (a * PHYS_DIM + s) * self.right;
        &self.data[start..start + self.right]
    }

    /// `out = v^T A[s]`, with `v` of length `left` and `out` of length `right`.
    #[inline]
    pub(crate) fn apply_left(&self, v: &[T], s: usize, out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (a, &va) in v.iter().enumerate() {
            if va == T::zero() {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(a, s)) {
                *o += va * m;
            }
        }
    }

    /// `out = A[s] w`, with `w` of length `right` and `out` of length `left`.
    #[inline]
    pub(crate) fn apply_right(&self, w: &[T], s: usize, out: &mut [T]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(a, s), w);
        }
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Normalize `v` in place, returning its previous Euclidean norm.
#[inline]
pub(crate) fn normalize_in_place<T: Scalar>(v: &mut [T]) -> T {
    let n = dot(v, v).sqrt();
    if n > T::zero() {
        let inv = T::one() / n;
        v.iter_mut().for_each(|x| *x *= inv);
    }
    n
}

/// Signed logarithmic amplitude: `psi = sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAmplitude<T> {
    pub sign: T,
    pub log_abs: T,
}

impl<T: Scalar> LogAmplitude<T> {
    pub fn is_zero(&self) -> bool {
        self.sign == T::zero()
    }

    /// `ln |psi|^2`, `-inf` for a zero amplitude.
    pub fn log_prob(&self) -> T {
        if self.is_zero() {
            T::of(f64::NEG_INFINITY)
        } else {
            self.log_abs + self.log_abs
        }
    }

    pub fn value(&self) -> T {
        if self.is_zero() {
            T::zero()
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// A matrix product state with physical dimension 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Mps<T = f64> {
    sites: Vec<SiteTensor<T>>,
    bond_cap: usize,
    center: Option<usize>,
}

impl<T: Scalar> Mps<T> {
    /// Assemble a chain from site tensors. The result has no orthogonality
    /// center; call [`Mps::canonicalize`] to establish one.
    pub fn from_sites(sites: Vec<SiteTensor<T>>, bond_cap: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("an MPS needs at least one site".into()));
        }
        if bond_cap == 0 {
            return Err(Error::InvalidArgument("bond cap must be positive".into()));
        }
        let n = sites.len();
        if sites[0].left != 1 || sites[n - 1].right != 1 {
            return Err(Error::Shape("boundary bonds must have dimension 1".into()));
        }
        for i in 0..n - 1 {
            if sites[i].right != sites[i + 1].left {
                return Err(Error::Shape(format!(
                    "bond {i}: right dimension {} != next left dimension {}",
                    sites[i].right,
                    sites[i + 1].left
                )));
            }
            if sites[i].right > bond_cap {
                return Err(Error::Shape(format!(
                    "bond {i} has dimension {} above the cap {bond_cap}",
                    sites[i].right
                )));
            }
        }
        Ok(Self { sites, bond_cap, center: None })
    }

    /// Product state with per-site amplitudes `[amp(0), amp(1)]`.
    pub fn product(amplitudes: &[[T; 2]], bond_cap: usize) -> Result<Self> {
        let sites = amplitudes
            .iter()
            .map(|&[a0, a1]| SiteTensor::new(1, 1, vec![a0, a1]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sites(sites, bond_cap)
    }

    /// The normalized product state concentrated on a single bit string.
    pub fn delta(bits: &[u8], bond_cap: usize) -> Result<Self> {
        let amps: Vec<[T; 2]> = bits
            .iter()
            .map(|&b| if b == 0 { [T::one(), T::zero()] } else { [T::zero(), T::one()] })
            .collect();
        // unit-norm 1x1 sites are already orthogonal in both directions
        let mut mps = Self::product(&amps, bond_cap)?;
        mps.center = Some(0);
        Ok(mps)
    }

    /// The uniform superposition over all `2^n` strings.
    pub fn uniform(n_sites: usize, bond_cap: usize) -> Result<Self> {
        let h = T::of(std::f64::consts::FRAC_1_SQRT_2);
        let mut mps = Self::product(&vec![[h, h]; n_sites], bond_cap)?;
        mps.center = Some(0);
        Ok(mps)
    }

    /// Bond dimension of the bond right of site `i` for a freshly initialized
    /// chain: `min(cap, 2^min(i + 1, n - i - 1))`.
    pub fn initial_bond(n_sites: usize, i: usize, bond_cap: usize) -> usize {
        let span = (i + 1).min(n_sites - i - 1);
        if span >= usize::BITS as usize - 1 {
            bond_cap
        } else {
            bond_cap.min(1usize << span)
        }
    }

    /// Entries i.i.d. uniform on `(-1, 1)` at the maximal admissible bond
    /// dimensions, not canonicalized.
    pub fn random_raw(n_sites: usize, bond_cap: usize, rng: &mut impl Rng) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidArgument("an MPS needs at least one site".into()));
        }
        let bonds: Vec<usize> = (0..n_sites)
            .map(|i| if i + 1 == n_sites { 1 } else { Self::initial_bond(n_sites, i, bond_cap) })
            .collect();
        let sites = (0..n_sites)
            .map(|i| {
                let left = if i == 0 { 1 } else { bonds[i - 1] };
                let right = bonds[i];
                let data = (0..left * PHYS_DIM * right)
                    .map(|_| T::of(rng.random_range(-1.0..1.0)))
                    .collect();
                SiteTensor { left, right, data }
            })
            .collect();
        Self::from_sites(sites, bond_cap)
    }

    /// Random initialization, canonicalized with the center on the first site.
    pub fn random(n_sites: usize, bond_cap: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut mps = Self::random_raw(n_sites, bond_cap, rng)?;
        mps.canonicalize(0)?;
        Ok(mps)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn phys_dim(&self) -> usize {
        PHYS_DIM
    }

    pub fn bond_cap(&self) -> usize {
        self.bond_cap
    }

    /// Zero-based site index of the orthogonality center, if canonical.
    pub fn ortho_center(&self) -> Option<usize> {
        self.center
    }

    pub fn sites(&self) -> &[SiteTensor<T>] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &SiteTensor<T> {
        &self.sites[i]
    }

    /// Replace a site tensor. Invalidates the orthogonality center.
    pub fn set_site(&mut self, i: usize, tensor: SiteTensor<T>) -> Result<()> {
        self.check_site(i)?;
        let old = &self.sites[i];
        if old.left != tensor.left || old.right != tensor.right {
            return Err(Error::Shape(format!(
                "site {i}: replacement ({}, 2, {}) does not match ({}, 2, {})",
                tensor.left, tensor.right, old.left, old.right
            )));
        }
        self.sites[i] = tensor;
        self.center = None;
        Ok(())
    }

    pub(crate) fn sites_mut(&mut self) -> &mut Vec<SiteTensor<T>> {
        &mut self.sites
    }

    pub(crate) fn set_center(&mut self, center: Option<usize>) {
        self.center = center;
    }

    /// Internal bond dimensions, `n - 1` entries.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.n_sites() - 1].iter().map(|s| s.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn with_bond_cap(mut self, bond_cap: usize) -> Result<Self> {
        if bond_cap < self.max_bond() {
            return Err(Error::InvalidArgument(format!(
                "bond cap {bond_cap} below current maximal bond {}",
                self.max_bond()
            )));
        }
        self.bond_cap = bond_cap;
        Ok(self)
    }

    pub(crate) fn check_site(&self, i: usize) -> Result<()> {
        if i >= self.n_sites() {
            return Err(Error::SiteOutOfRange { site: i, n_sites: self.n_sites() });
        }
        Ok(())
    }

    pub(crate) fn check_bits(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.n_sites() {
            return Err(Error::LengthMismatch { expected: self.n_sites(), got: bits.len() });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bit values must be 0 or 1".into()));
        }
        Ok(())
    }

    /// `<x|Psi>` by direct left-to-right contraction.
    ///
    /// May underflow to zero on long chains; use [`Mps::log_amplitude`] there.
    pub fn amplitude(&self, x: &BinaryImage) -> Result<T> {
        self.amplitude_bits(x.bits())
    }

    pub fn amplitude_bits(&self, bits: &[u8]) -> Result<T> {
        self.check_bits(bits)?;
        let mut v = vec![T::one()];
        let mut next = Vec::new();
        for (site, &b) in self.sites.iter().zip(bits) {
            next.resize(site.right, T::zero());
            site.apply_left(&v, b as usize, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(v[0])
    }

    /// `<x|Psi>` in sign/log-magnitude form, renormalizing the partial
    /// contraction at every site so that no intermediate under- or overflows.
    pub fn log_amplitude(&self, x: &BinaryImage) -> Result<LogAmplitude<T>> {
        self.log_amplitude_bits(x.bits())
    }

    pub fn log_amplitude_bits(&self, bits: &[u8]) -> Result<LogAmplitude<T>> {
        self.check_bits(bits)?;
        let mut v = vec![T::one()];
        let mut next = Vec::new();
        let mut log_abs = T::zero();
        for (site, &b) in self.sites.iter().zip(bits) {
            next.resize(site.right, T::zero());
            site.apply_left(&v, b as usize, &mut next);
            std::mem::swap(&mut v, &mut next);
            let n = normalize_in_place(&mut v);
            if n == T::zero() {
                return Ok(LogAmplitude { sign: T::zero(), log_abs: T::of(f64::NEG_INFINITY) });
            }
            log_abs += n.ln();
        }
        Ok(LogAmplitude { sign: v[0].signum(), log_abs })
    }

    /// `ln <Psi|Psi>` via the transfer-matrix contraction, valid with or
    /// without an orthogonality center.
    pub fn log_norm_squared(&self) -> T {
        // env is a left x left Gram matrix, kept at unit Frobenius norm
        let mut env = vec![T::one()];
        let mut dim = 1;
        let mut log_scale = T::zero();
        for site in &self.sites {
            let r = site.right;
            let mut next = vec![T::zero(); r * r];
            for s in 0..PHYS_DIM {
                // tmp = env * A[s]  (dim x r)
                let mut tmp = vec![T::zero(); dim * r];
                for a in 0..dim {
                    for a2 in 0..dim {
                        let e = env[a * dim + a2];
                        if e == T::zero() {
                            continue;
                        }
                        for (t, &m) in tmp[a * r..(a + 1) * r].iter_mut().zip(site.row(a2, s)) {
                            *t += e * m;
                        }
                    }
                }
                // next += A[s]^T tmp
                for a in 0..dim {
                    let row = site.row(a, s);
                    for (b, &rb) in row.iter().enumerate() {
                        for (nx, &t) in next[b * r..(b + 1) * r].iter_mut().zip(&tmp[a * r..(a + 1) * r]) {
                            *nx += rb * t;
                        }
                    }
                }
            }
            let n = crate::linalg::frobenius(&next);
            if n == T::zero() {
                return T::of(f64::NEG_INFINITY);
            }
            next.iter_mut().for_each(|x| *x /= n);
            log_scale += n.ln();
            env = next;
            dim = r;
        }
        log_scale + env[0].ln()
    }

    /// Dense state vector; entry index reads `x_0` as the most significant bit.
    ///
    /// Exponential in `n`; intended for small chains.
    pub fn to_dense(&self) -> Result<Vec<T>> {
        let n = self.n_sites();
        if n > 24 {
            return Err(Error::InvalidArgument(format!("refusing to expand {n} sites densely")));
        }
        let mut bits = vec![0u8; n];
        (0..1usize << n)
            .map(|idx| {
                for (k, b) in bits.iter_mut().enumerate() {
                    *b = ((idx >> (n - 1 - k)) & 1) as u8;
                }
                self.amplitude_bits(&bits)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn img(bits: &[u8]) -> BinaryImage {
        BinaryImage::from_bits(bits.to_vec()).unwrap()
    }

    #[test]
    fn delta_single_site() {
        let mps = Mps::<f64>::product(&[[1.0, 0.0]], 2).unwrap();
        assert_eq!(mps.amplitude(&img(&[0])).unwrap(), 1.0);
        assert_eq!(mps.amplitude(&img(&[1])).unwrap(), 0.0);
    }

    #[test]
    fn uniform_two_sites() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mps = Mps::<f64>::product(&[[h, h], [h, h]], 2).unwrap();
        assert!((mps.amplitude(&img(&[0, 1])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let mps = Mps::<f64>::uniform(3, 2).unwrap();
        assert!(matches!(
            mps.amplitude(&img(&[0, 1])),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn log_amplitude_survives_long_chains() {
        let mps = Mps::<f64>::uniform(784, 2).unwrap();
        let x = img(&[1; 784]);
        let la = mps.log_amplitude(&x).unwrap();
        assert!((la.log_prob() + 784.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(mps.amplitude(&x).unwrap() < 1e-100);
    }

    #[test]
    fn log_amplitude_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mps = Mps::<f64>::random_raw(7, 3, &mut rng).unwrap();
        let bits = [1, 0, 0, 1, 1, 0, 1];
        let direct = mps.amplitude_bits(&bits).unwrap();
        let la = mps.log_amplitude_bits(&bits).unwrap();
        assert!((la.value() - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn transfer_norm_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mps = Mps::<f64>::random_raw(6, 3, &mut rng).unwrap();
        let dense: f64 = mps.to_dense().unwrap().iter().map(|a| a * a).sum();
        assert!((mps.log_norm_squared() - dense.ln()).abs() < 1e-10);
    }

    #[test]
    fn initial_bonds_follow_the_cap() {
        let mps = Mps::<f64>::random_raw(8, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(mps.bond_dims(), vec![2, 4, 5, 5, 5, 4, 2]);
    }

    #[test]
    fn rejects_mismatched_bonds() {
        let a = SiteTensor::<f64>::zeros(1, 2);
        let b = SiteTensor::<f64>::zeros(3, 1);
        assert!(Mps::from_sites(vec![a, b], 4).is_err());
    }
}
