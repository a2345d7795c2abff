use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryImage, Dataset};
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::train::QualityMonitor;
use crate::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn balanced_accuracy(&self) -> f64 {
        let tpr = self.tp as f64 / (self.tp + self.fn_).max(1) as f64;
        let tnr = self.tn as f64 / (self.tn + self.fp).max(1) as f64;
        0.5 * (tpr + tnr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    /// `epsilon` on the probability scale; may underflow to 0 for long chains.
    pub threshold: f64,
    pub log_threshold: f64,
    pub balanced_accuracy: f64,
    pub confusion: Confusion,
}

/// `ln |Psi(x)|^2`, `-inf` for a vanishing amplitude.
pub fn log_prob<T: Scalar>(mps: &Mps<T>, x: &BinaryImage) -> Result<f64> {
    let la = mps.log_amplitude(x)?;
    Ok(if la.is_zero() { f64::NEG_INFINITY } else { la.log_prob().widen() })
}

pub fn log_probs<T: Scalar>(mps: &Mps<T>, set: &Dataset) -> Result<Vec<f64>> {
    set.images().par_iter().map(|x| log_prob(mps, x)).collect()
}

/// Membership in the full set: `|Psi(x)|^2 >= epsilon`, given `ln epsilon`.
/// A vanishing amplitude is never a member, so `-inf` acts as `epsilon = 0+`.
pub fn indicator<T: Scalar>(mps: &Mps<T>, log_epsilon: f64, x: &BinaryImage) -> Result<bool> {
    let lp = log_prob(mps, x)?;
    Ok(lp > f64::NEG_INFINITY && lp >= log_epsilon)
}

fn confusion_at(pos_sorted: &[f64], neg_sorted: &[f64], c: f64) -> Confusion {
    let pos_below = pos_sorted.partition_point(|&s| s < c);
    let neg_below = neg_sorted.partition_point(|&s| s < c);
    Confusion {
        tp: pos_sorted.len() - pos_below,
        fn_: pos_below,
        fp: neg_sorted.len() - neg_below,
        tn: neg_below,
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Report for a fixed threshold on log-probability scores.
pub fn evaluate_scores(positives: &[f64], negatives: &[f64], log_threshold: f64) -> DiscriminationReport {
    let confusion = confusion_at(&sorted(positives), &sorted(negatives), log_threshold);
    DiscriminationReport {
        threshold: log_threshold.exp(),
        log_threshold,
        balanced_accuracy: confusion.balanced_accuracy(),
        confusion,
    }
}

/// The observed score maximizing balanced accuracy when used as the
/// acceptance threshold `score >= c`; ties go to the smallest `c`.
pub fn calibrate_scores(positives: &[f64], negatives: &[f64]) -> Result<DiscriminationReport> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InvalidArgument("calibration needs positive and negative examples".into()));
    }
    let (pos, neg) = (sorted(positives), sorted(negatives));
    let mut candidates: Vec<f64> = pos.iter().chain(&neg).copied().filter(|s| s.is_finite()).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best: Option<(f64, f64, Confusion)> = None;
    for &c in &candidates {
        let conf = confusion_at(&pos, &neg, c);
        let ba = conf.balanced_accuracy();
        if best.is_none_or(|b| ba > b.1) {
            best = Some((c, ba, conf));
        }
    }
    let (c, ba, confusion) =
        best.ok_or_else(|| Error::Degenerate("every score is infinite; no threshold to calibrate".into()))?;
    Ok(DiscriminationReport { threshold: c.exp(), log_threshold: c, balanced_accuracy: ba, confusion })
}

pub fn calibrate_threshold<T: Scalar>(
    mps: &Mps<T>,
    positives: &Dataset,
    negatives: &Dataset,
) -> Result<DiscriminationReport> {
    calibrate_scores(&log_probs(mps, positives)?, &log_probs(mps, negatives)?)
}

/// Early-stopping signal for a single model: calibrated balanced accuracy on
/// held-out positives and negatives.
#[derive(Debug, Clone)]
pub struct DiscriminationMonitor {
    pub positives: Dataset,
    pub negatives: Dataset,
}

impl<T: Scalar> QualityMonitor<T> for DiscriminationMonitor {
    fn quality(&mut self, mps: &Mps<T>) -> Result<f64> {
        Ok(calibrate_threshold(mps, &self.positives, &self.negatives)?.balanced_accuracy)
    }
}
