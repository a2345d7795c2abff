use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PackedBits};
use crate::error::{Error, Result};

/// Power-law fit `d_min ~ K^s` of the mean nearest-neighbour distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalFit {
    pub k_values: Vec<usize>,
    pub d_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `-1 / slope`.
    pub delta: f64,
    pub fit_r2: f64,
}

impl FractalFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("log_k,log_d,k,d\n");
        for (&k, &d) in self.k_values.iter().zip(&self.d_values) {
            s.push_str(&format!("{:.10e},{:.10e},{k},{d:.10e}\n", (k as f64).ln(), d.ln()));
        }
        s
    }
}

/// `k_min, 2 k_min, 4 k_min, ...` up to `k_max`.
pub fn doubling_schedule(k_min: usize, k_max: usize) -> Vec<usize> {
    std::iter::successors(Some(k_min.max(2)), |&k| Some(k * 2)).take_while(|&k| k <= k_max).collect()
}

/// Mean over points of the distance to the nearest other point.
pub fn mean_nearest_neighbour(points: &[PackedBits]) -> f64 {
    let total: u64 = (0..points.len())
        .into_par_iter()
        .map(|a| {
            points
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(_, p)| points[a].hamming(p))
                .min()
                .unwrap_or(0) as u64
        })
        .sum();
    total as f64 / points.len() as f64
}

/// Ordinary least squares `y = intercept + slope x`, with `r^2`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// For each `K` in `k_schedule`, draw `K` images without replacement and
/// average their nearest-neighbour Hamming distances; fit `ln d` against
/// `ln K`.
pub fn fractal_dimension(set: &Dataset, k_schedule: &[usize], seed: u64) -> Result<FractalFit> {
    if k_schedule.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 sample sizes, got {}", k_schedule.len())));
    }
    if k_schedule.windows(2).any(|w| w[0] >= w[1]) || k_schedule[0] < 2 {
        return Err(Error::InvalidArgument("sample sizes must be increasing and at least 2".into()));
    }
    let kmax = *k_schedule.last().unwrap();
    if set.len() < kmax {
        return Err(Error::InvalidArgument(format!("set of {} images is smaller than K = {kmax}", set.len())));
    }
    let packed: Vec<PackedBits> = set.iter().map(|x| x.packed()).collect();
    let mut d_values = Vec::with_capacity(k_schedule.len());
    for (i, &k) in k_schedule.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let pick: Vec<PackedBits> =
            rand::seq::index::sample(&mut rng, packed.len(), k).into_iter().map(|j| packed[j].clone()).collect();
        d_values.push(mean_nearest_neighbour(&pick));
    }
    let k_values = k_schedule.to_vec();
    if d_values.iter().any(|&d| d <= 0.0) {
        return Err(Error::NoScaling { slope: f64::NAN, d_values });
    }
    let lx: Vec<f64> = k_values.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = d_values.iter().map(|d| d.ln()).collect();
    let (slope, intercept, fit_r2) = linear_fit(&lx, &ly);
    if !(slope < 0.0) {
        return Err(Error::NoScaling { slope, d_values });
    }
    Ok(FractalFit { k_values, d_values, slope, intercept, delta: -1.0 / slope, fit_r2 })
}
