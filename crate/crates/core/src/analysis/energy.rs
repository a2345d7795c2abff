use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryImage, Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::Scalar;

/// `E(x) = -ln |Psi(x)|^2` in nats. A vanishing amplitude is flagged rather
/// than mapped to a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub fn is_finite(self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    /// The energy as a float, `+inf` when flagged.
    pub fn value(self) -> f64 {
        match self {
            Energy::Finite(e) => e,
            Energy::Infinite => f64::INFINITY,
        }
    }
}

pub fn energy<T: Scalar>(mps: &Mps<T>, x: &BinaryImage) -> Result<Energy> {
    if mps.ortho_center().is_none() {
        return Err(Error::NoOrthoCenter);
    }
    let la = mps.log_amplitude(x)?;
    let e = -la.log_prob().widen();
    Ok(if la.is_zero() || !e.is_finite() { Energy::Infinite } else { Energy::Finite(e) })
}

/// Energies of every image in `set`, in order.
pub fn energies<T: Scalar>(mps: &Mps<T>, set: &Dataset) -> Result<Vec<Energy>> {
    set.images().par_iter().map(|x| energy(mps, x)).collect()
}

/// `E0 = -ln <exp(-E)>`, evaluated with a shift by the minimum.
pub fn e0(energies: &[f64]) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::InvalidArgument("E0 of an empty set".into()));
    }
    if let Some(bad) = energies.iter().find(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite energy {bad}")));
    }
    let m = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = energies.iter().map(|&e| (m - e).exp()).sum();
    Ok(m - (s / energies.len() as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub energies: Vec<f64>,
    pub e0: f64,
    pub e_ground: f64,
    pub mean_e: f64,
    pub std_e: f64,
    pub set_tag: SplitTag,
}

impl EnergyStats {
    pub fn from_energies(energies: Vec<f64>, set_tag: SplitTag) -> Result<Self> {
        let e0 = e0(&energies)?;
        let n = energies.len() as f64;
        let e_ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let mean_e = energies.iter().sum::<f64>() / n;
        let var = if energies.len() > 1 {
            energies.iter().map(|e| (e - mean_e).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self { energies, e0, e_ground, mean_e, std_e: var.sqrt(), set_tag })
    }

    /// Statistics of `set` under `mps`; a zero-amplitude image is an error.
    pub fn of_dataset<T: Scalar>(mps: &Mps<T>, set: &Dataset) -> Result<Self> {
        let es = energies(mps, set)?;
        let mut out = Vec::with_capacity(es.len());
        for (k, e) in es.into_iter().enumerate() {
            match e {
                Energy::Finite(v) => out.push(v),
                Energy::Infinite => return Err(Error::ZeroAmplitude { sample: k }),
            }
        }
        Self::from_energies(out, set.split)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}
