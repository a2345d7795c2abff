use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::Scalar;

pub const DEFAULT_PLATEAU: (usize, usize) = (200, 600);

/// Entanglement entropy against cut position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageCurve {
    /// `s_k[k - 1]` is the entropy of the first `k` sites, `k = 1..n-1`.
    pub s_k: Vec<f64>,
    /// Bond dimension at each cut.
    pub bonds: Vec<usize>,
    /// Plateau actually averaged over, after clamping to the chain.
    pub plateau_range: (usize, usize),
    pub s_bar: f64,
}

impl PageCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,s_k,bond\n");
        for (i, (v, b)) in self.s_k.iter().zip(&self.bonds).enumerate() {
            s.push_str(&format!("{},{v:.10e},{b}\n", i + 1));
        }
        s
    }
}

/// Clamp `[lo, hi]` to the cuts `1..n-1`; a range lying entirely beyond the
/// chain falls back to every cut.
pub fn clamp_plateau(range: (usize, usize), n_sites: usize) -> Result<(usize, usize)> {
    if n_sites < 2 {
        return Err(Error::InvalidArgument("a chain of one site has no cuts".into()));
    }
    let (lo, hi) = range;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("invalid plateau range [{lo}, {hi}]")));
    }
    let last = n_sites - 1;
    Ok(if lo > last { (1, last) } else { (lo, hi.min(last)) })
}

/// Entropy at every cut from one canonical sweep, and its plateau average.
pub fn page_curve<T: Scalar>(mps: &Mps<T>, plateau: (usize, usize)) -> Result<PageCurve> {
    let (lo, hi) = clamp_plateau(plateau, mps.n_sites())?;
    let spectra = mps.all_schmidt_spectra()?;
    let s_k: Vec<f64> = spectra.iter().map(|s| s.entropy().widen()).collect();
    let s_bar = s_k[lo - 1..hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    Ok(PageCurve { s_k, bonds: mps.bond_dims(), plateau_range: (lo, hi), s_bar })
}
