use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryImage, PackedBits};
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::sample::{SampleLimits, SampleRequest, Sampler};
use crate::Scalar;

/// Scores images by how well they show the intended pattern, in `[0, 1]`.
pub trait QualityOracle: Sync {
    fn score(&self, x: &BinaryImage) -> Result<f64>;
}

impl<F: Fn(&BinaryImage) -> f64 + Sync> QualityOracle for F {
    fn score(&self, x: &BinaryImage) -> Result<f64> {
        Ok(self(x))
    }
}

/// Scores supplied by an external tool, keyed by the hex packing of each
/// image (see [`PackedBits::to_hex`]).
///
/// The file is CSV with header `key,score`.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable(HashMap<PackedBits, f64>);

impl ScoreTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "key,score" => {}
            other => {
                return Err(Error::Format(format!("expected header `key,score`, got {:?}", other.map(|l| l.1))))
            }
        }
        let mut map = HashMap::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("scores line {}: {line:?}", i + 1));
            let (key, score) = line.split_once(',').ok_or_else(bad)?;
            let score: f64 = score.trim().parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::Format(format!("scores line {}: score {score} outside [0, 1]", i + 1)));
            }
            if key.len() % 16 != 0 || key.is_empty() {
                return Err(bad());
            }
            let words = (0..key.len() / 16)
                .map(|w| u64::from_str_radix(&key[w * 16..(w + 1) * 16], 16))
                .collect::<std::result::Result<Vec<u64>, _>>()
                .map_err(|_| bad())?;
            map.insert(PackedBits::from_words(words), score);
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl QualityOracle for ScoreTable {
    fn score(&self, x: &BinaryImage) -> Result<f64> {
        let key = x.packed();
        self.0
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Format(format!("no score for image {}", key.to_hex())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityBin {
    /// Upper edge of the energy bin.
    pub energy: f64,
    pub lower: f64,
    pub mean: f64,
    pub std: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeatThreshold {
    pub epsilon_star: f64,
    pub reference_mean: f64,
    pub reference_std: f64,
    pub profile: Vec<QualityBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeatOptions {
    pub samples_per_bin: usize,
    pub seed: u64,
    pub limits: SampleLimits,
}

/// Scan `e_grid` for the energy above which samples stop looking neat.
///
/// Bin `i > 0` holds samples with energy in `(e_grid[i-1], e_grid[i]]`; the
/// reference bin at `e_grid[0]` spans one grid step below it. The result is
/// the first grid energy whose mean quality falls below the reference mean
/// minus the reference standard deviation. Bins beyond the result are not
/// sampled.
pub fn neat_threshold<T: Scalar>(
    mps: &Mps<T>,
    oracle: &dyn QualityOracle,
    e_grid: &[f64],
    opts: NeatOptions,
) -> Result<NeatThreshold> {
    if e_grid.len() < 2 || e_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("energy grid needs at least 2 increasing points".into()));
    }
    if opts.samples_per_bin < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples per bin".into()));
    }
    let sampler = Sampler::new(mps)?;
    let mut profile = Vec::with_capacity(e_grid.len());
    let mut reference = None;
    for (i, &e) in e_grid.iter().enumerate() {
        let lower = if i == 0 { e - (e_grid[1] - e_grid[0]) } else { e_grid[i - 1] };
        let req = SampleRequest {
            count: opts.samples_per_bin,
            seed: opts.seed.wrapping_add(i as u64),
            clamped: None,
            // lower edge is exclusive; nudge it by one ulp
            energy_window: Some((lower.next_up(), e)),
            limits: opts.limits,
        };
        let batch = sampler.sample_batch(&req)?;
        let scores = batch.dataset.images().par_iter().map(|x| oracle.score(x)).collect::<Result<Vec<f64>>>()?;
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let std = (scores.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        profile.push(QualityBin { energy: e, lower, mean, std, samples: scores.len() });
        match reference {
            None => reference = Some((mean, std)),
            Some((m0, s0)) if mean < m0 - s0 => {
                return Ok(NeatThreshold { epsilon_star: e, reference_mean: m0, reference_std: s0, profile });
            }
            Some(_) => {}
        }
    }
    Err(Error::ThresholdNotFound { profile: profile.iter().map(|b| (b.energy, b.mean, b.std)).collect() })
}
