use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PackedBits};
use crate::error::{Error, Result};

pub const DEFAULT_PAIR_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingStats {
    pub mean_pairwise: f64,
    pub std_pairwise: f64,
    /// Standard error of `mean_pairwise`.
    pub stderr: f64,
    pub pairs: usize,
    pub exhaustive: bool,
    pub mean_black_pixels: f64,
    /// `2 q (1 - q) n` with `q` the fraction of black pixels.
    pub random_baseline: f64,
    pub n_sites: usize,
}

/// Pairwise Hamming statistics of `set`: all pairs if there are at most
/// `pair_budget` of them, otherwise `pair_budget` seeded random pairs of
/// distinct images.
pub fn hamming_stats(set: &Dataset, pair_budget: usize, seed: u64) -> Result<HammingStats> {
    let n = set.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Hamming statistics need at least 2 images, got {n}")));
    }
    if pair_budget == 0 {
        return Err(Error::InvalidArgument("pair budget must be positive".into()));
    }
    let packed: Vec<PackedBits> = set.iter().map(|x| x.packed()).collect();
    let total_pairs = n * (n - 1) / 2;
    let exhaustive = total_pairs <= pair_budget;
    let mut dists = Vec::with_capacity(total_pairs.min(pair_budget));
    if exhaustive {
        for a in 0..n {
            for b in a + 1..n {
                dists.push(packed[a].hamming(&packed[b]) as f64);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pair_budget {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            dists.push(packed[a].hamming(&packed[b]) as f64);
        }
    }
    let m = dists.len() as f64;
    let mean = dists.iter().sum::<f64>() / m;
    let std = if dists.len() > 1 {
        (dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let n_sites = set.n_sites().unwrap_or(0);
    let black = set.mean_black_pixels();
    let q = black / n_sites as f64;
    Ok(HammingStats {
        mean_pairwise: mean,
        std_pairwise: std,
        stderr: std / m.sqrt(),
        pairs: dists.len(),
        exhaustive,
        mean_black_pixels: black,
        random_baseline: 2.0 * q * (1.0 - q) * n_sites as f64,
        n_sites,
    })
}
