//! Exact sequential Born-rule sampling.
//!
//! With the orthogonality center on site 0 every later site is
//! right-orthogonal, so the marginal of the first `j + 1` bits is the squared
//! norm of the partial product `A_0[x_0] ... A_j[x_j]`. Pixels are drawn one
//! at a time from these marginals at `O(n D^2)` per sample.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryImage, Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::mps::{dot, normalize_in_place, Mps, SiteTensor};
use crate::Scalar;

/// Partial assignment of pixel values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clamps(BTreeMap<usize, u8>);

impl Clamps {
    pub fn new(pairs: impl IntoIterator<Item = (usize, u8)>, n_sites: usize) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (site, bit) in pairs {
            if site >= n_sites {
                return Err(Error::SiteOutOfRange { site, n_sites });
            }
            if bit > 1 {
                return Err(Error::InvalidArgument(format!("clamp value {bit} at site {site} is not a bit")));
            }
            if map.insert(site, bit).is_some() {
                return Err(Error::InvalidArgument(format!("site {site} clamped twice")));
            }
        }
        Ok(Self(map))
    }

    /// Parse `site bit` pairs, one per line; `#` starts a comment.
    pub fn parse(text: &str, n_sites: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("clamp line {}: expected `site bit`, got {line:?}", lineno + 1));
            let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            let site = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let bit = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            pairs.push((site, bit));
        }
        Self::new(pairs, n_sites)
    }

    pub fn get(&self, site: usize) -> Option<u8> {
        self.0.get(&site).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn allowed(&self, site: usize) -> std::ops::RangeInclusive<usize> {
        match self.get(site) {
            Some(b) => b as usize..=b as usize,
            None => 0..=1,
        }
    }
}

/// One drawn configuration with its energy `-ln |Psi(x)|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleLimits {
    /// Attempts after which a window with acceptance below `min_acceptance`
    /// is declared infeasible.
    pub probe_budget: u64,
    pub min_acceptance: f64,
    /// Hard cap on attempts for one request.
    pub max_attempts: u64,
}

impl Default for SampleLimits {
    fn default() -> Self {
        Self { probe_budget: 100_000, min_acceptance: 1e-6, max_attempts: 10_000_000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub count: usize,
    pub seed: u64,
    pub clamped: Option<Clamps>,
    /// Inclusive `[lo, hi]` on the energy of accepted samples.
    pub energy_window: Option<(f64, f64)>,
    pub limits: SampleLimits,
}

impl SampleRequest {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed, ..Default::default() }
    }

    pub fn window(mut self, lo: f64, hi: f64) -> Self {
        self.energy_window = Some((lo, hi));
        self
    }

    pub fn clamp(mut self, clamps: Clamps) -> Self {
        self.clamped = Some(clamps);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dataset: Dataset,
    pub energies: Vec<f64>,
    /// Draws made, including those rejected by the energy window.
    pub attempts: u64,
    pub seed: u64,
}

/// The random stream used for attempt number `attempt` under `seed`.
pub fn attempt_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    rng
}

fn in_window(e: f64, (lo, hi): (f64, f64)) -> bool {
    // energies are recomputed along different contraction orders
    let tol = 1e-9 * e.abs().max(1.0);
    e >= lo - tol && e <= hi + tol
}

/// Draws `s` from weights `(q0, q1)` with a uniform `u`.
fn pick<T: Scalar>(q: [T; 2], allowed: &std::ops::RangeInclusive<usize>, u: f64) -> usize {
    if allowed.start() == allowed.end() {
        return *allowed.start();
    }
    let (q0, q1) = (q[0].widen(), q[1].widen());
    if u * (q0 + q1) < q0 {
        0
    } else {
        1
    }
}

/// Sampler over a fixed model, which it keeps centered on site 0.
#[derive(Debug, Clone)]
pub struct Sampler<T: Scalar> {
    mps: Mps<T>,
    shape: (usize, usize),
}

impl<T: Scalar> Sampler<T> {
    pub fn new(mps: &Mps<T>) -> Result<Self> {
        let mut mps = mps.clone();
        match mps.ortho_center() {
            Some(_) => mps.move_center(0)?,
            None => mps.canonicalize(0)?,
        }
        let shape = (1, mps.n_sites());
        Ok(Self { mps, shape })
    }

    /// Image shape given to drawn samples.
    pub fn with_shape(mut self, height: usize, width: usize) -> Result<Self> {
        if height * width != self.mps.n_sites() {
            return Err(Error::Shape(format!(
                "{height}x{width} images do not fit a chain of {} sites",
                self.mps.n_sites()
            )));
        }
        self.shape = (height, width);
        Ok(self)
    }

    pub fn model(&self) -> &Mps<T> {
        &self.mps
    }

    pub fn sample_one(&self, rng: &mut impl Rng) -> Result<Sample> {
        let tol = T::eps().sqrt().widen() * 100.0;
        let n = self.mps.n_sites();
        let mut bits = Vec::with_capacity(n);
        let mut v = vec![T::one()];
        let mut w = [Vec::new(), Vec::new()];
        let mut log_p = 0.0;
        for (j, site) in self.mps.sites().iter().enumerate() {
            let q: [T; 2] = std::array::from_fn(|s| {
                w[s].resize(site.right(), T::zero());
                site.apply_left(&v, s, &mut w[s]);
                dot(&w[s], &w[s])
            });
            let total = (q[0] + q[1]).widen();
            if !total.is_finite() || (total - 1.0).abs() > tol {
                return Err(Error::Internal(format!(
                    "conditional marginals at site {j} sum to {total}; the model is not right-canonical"
                )));
            }
            let s = pick(q, &(0..=1), rng.random::<f64>());
            log_p += q[s].widen().ln();
            v = std::mem::take(&mut w[s]);
            normalize_in_place(&mut v);
            bits.push(s as u8);
        }
        Ok(Sample { bits, energy: -log_p })
    }

    /// Precompute the environments for sampling with `clamps` fixed.
    pub fn conditional(&self, clamps: &Clamps) -> Result<ConditionalSampler<'_, T>> {
        ConditionalSampler::new(self, clamps.clone())
    }

    pub fn sample_conditional(&self, clamps: &Clamps, rng: &mut impl Rng) -> Result<Sample> {
        self.conditional(clamps)?.sample(rng)
    }

    /// Draw `req.count` samples, each attempt from its own random stream so
    /// the batch does not depend on the thread count.
    pub fn sample_batch(&self, req: &SampleRequest) -> Result<SampleBatch> {
        if let Some((lo, hi)) = req.energy_window {
            if !(lo <= hi) {
                return Err(Error::InvalidArgument(format!("energy window [{lo}, {hi}] is empty")));
            }
        }
        let cond = match &req.clamped {
            Some(c) if !c.is_empty() => Some(self.conditional(c)?),
            _ => None,
        };
        let draw = |attempt: u64| {
            let mut rng = attempt_rng(req.seed, attempt);
            match &cond {
                Some(c) => c.sample(&mut rng),
                None => self.sample_one(&mut rng),
            }
        };
        let mut accepted: Vec<Sample> = Vec::with_capacity(req.count);
        let mut attempts = 0u64;
        while accepted.len() < req.count {
            let remaining = (req.count - accepted.len()) as u64;
            let block = if req.energy_window.is_some() { remaining.clamp(256, 65_536) } else { remaining };
            let drawn = (attempts..attempts + block).into_par_iter().map(draw).collect::<Result<Vec<_>>>()?;
            attempts += block;
            for s in drawn {
                if accepted.len() == req.count {
                    break;
                }
                if req.energy_window.is_none_or(|w| in_window(s.energy, w)) {
                    accepted.push(s);
                }
            }
            if accepted.len() == req.count {
                break;
            }
            let rate = accepted.len() as f64 / attempts as f64;
            if attempts >= req.limits.probe_budget && rate < req.limits.min_acceptance {
                return Err(Error::Infeasible(format!(
                    "energy window {:?} accepted {} of {attempts} draws",
                    req.energy_window.unwrap_or_default(),
                    accepted.len()
                )));
            }
            if attempts >= req.limits.max_attempts {
                return Err(Error::Infeasible(format!(
                    "only {} of {} samples after {attempts} draws",
                    accepted.len(),
                    req.count
                )));
            }
        }
        let (h, w) = self.shape;
        let mut images = Vec::with_capacity(accepted.len());
        let mut energies = Vec::with_capacity(accepted.len());
        for s in accepted {
            images.push(BinaryImage::new(s.bits, h, w)?);
            energies.push(s.energy);
        }
        let dataset = if images.is_empty() { Dataset::empty(SplitTag::Sampled) } else { Dataset::new(images, SplitTag::Sampled)? };
        Ok(SampleBatch { dataset, energies, attempts, seed: req.seed })
    }
}

/// Sampling restricted to the slice consistent with a set of clamps.
///
/// `env[j]` is the Gram matrix of the right boundary vectors of site `j`,
/// summed over clamp-consistent completions and scaled to unit max norm.
pub struct ConditionalSampler<'a, T: Scalar> {
    sampler: &'a Sampler<T>,
    clamps: Clamps,
    env: Vec<DMatrix<T>>,
    /// `ln` of the probability of the clamp slice.
    log_slice_prob: f64,
}

fn slice_matrix<T: Scalar>(site: &SiteTensor<T>, s: usize) -> DMatrix<T> {
    DMatrix::from_fn(site.left(), site.right(), |a, b| site.get(a, s, b))
}

impl<'a, T: Scalar> ConditionalSampler<'a, T> {
    fn new(sampler: &'a Sampler<T>, clamps: Clamps) -> Result<Self> {
        let mps = &sampler.mps;
        let n = mps.n_sites();
        if let Some((&last, _)) = clamps.0.iter().next_back() {
            if last >= n {
                return Err(Error::SiteOutOfRange { site: last, n_sites: n });
            }
        }
        let mut env = vec![DMatrix::<T>::zeros(0, 0); n];
        env[n - 1] = DMatrix::from_element(1, 1, T::one());
        let mut log_scale = 0.0;
        for j in (0..n - 1).rev() {
            let site = mps.site(j + 1);
            let mut e = DMatrix::<T>::zeros(site.left(), site.left());
            for s in clamps.allowed(j + 1) {
                let a = slice_matrix(site, s);
                e += &a * &env[j + 1] * a.transpose();
            }
            let m = e.amax();
            if m == T::zero() {
                return Err(Error::Infeasible(format!("clamps beyond site {j} have zero probability")));
            }
            e /= m;
            log_scale += m.widen().ln();
            env[j] = e;
        }
        let site0 = mps.site(0);
        let mut p0 = T::zero();
        for s in clamps.allowed(0) {
            let a = slice_matrix(site0, s);
            p0 += (&a * &env[0] * a.transpose())[(0, 0)];
        }
        let log_slice_prob = p0.widen().ln() + log_scale;
        if !(log_slice_prob >= f64::MIN_POSITIVE.ln()) {
            return Err(Error::Infeasible(format!(
                "clamped slice has probability exp({log_slice_prob:.3}), below the underflow threshold"
            )));
        }
        Ok(Self { sampler, clamps, env, log_slice_prob })
    }

    pub fn log_slice_prob(&self) -> f64 {
        self.log_slice_prob
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<Sample> {
        let mps = &self.sampler.mps;
        let mut bits = Vec::with_capacity(mps.n_sites());
        let mut v = vec![T::one()];
        let mut w = [Vec::new(), Vec::new()];
        for (j, site) in mps.sites().iter().enumerate() {
            let allowed = self.clamps.allowed(j);
            let e = &self.env[j];
            let q: [T; 2] = std::array::from_fn(|s| {
                if !allowed.contains(&s) {
                    return T::zero();
                }
                w[s].resize(site.right(), T::zero());
                site.apply_left(&v, s, &mut w[s]);
                let ws = nalgebra::DVectorView::from_slice(&w[s], w[s].len());
                (ws.transpose() * e * ws)[(0, 0)].max(T::zero())
            });
            if !(q[0] + q[1] > T::zero()) {
                return Err(Error::Infeasible(format!("no clamp-consistent continuation at site {j}")));
            }
            let s = pick(q, &allowed, rng.random::<f64>());
            v = std::mem::take(&mut w[s]);
            normalize_in_place(&mut v);
            bits.push(s as u8);
        }
        let la = mps.log_amplitude_bits(&bits)?;
        Ok(Sample { energy: -la.log_prob().widen(), bits })
    }
}
