//! Ten-way classification by the largest `|Psi_i(x)|^2` and single-model
//! discrimination by a calibrated threshold.

mod discriminate;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use discriminate::{
    calibrate_scores, calibrate_threshold, evaluate_scores, indicator, log_prob, log_probs, Confusion,
    DiscriminationMonitor, DiscriminationReport,
};

use crate::analysis::QualityOracle;
use crate::data::{BinaryImage, Dataset};
use crate::error::{Error, Result};
use crate::mps::Mps;
use crate::train::{TrainConfig, TrainTrace, Trainer};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Label(u8),
    /// Every model gives the input zero amplitude.
    Unclassifiable,
}

/// Index of the largest finite entry, the first one on ties.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > f64::NEG_INFINITY && best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub unclassifiable: usize,
    /// `confusion[true][predicted]` over the ensemble labels, in order.
    pub labels: Vec<u8>,
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ThresholdEntry {
    threshold: f64,
    log_threshold: f64,
}

/// One model per label, plus per-label discrimination thresholds.
#[derive(Debug, Clone)]
pub struct ClassifierEnsemble<T: Scalar> {
    models: BTreeMap<u8, Mps<T>>,
    log_thresholds: BTreeMap<u8, f64>,
}

impl<T: Scalar> ClassifierEnsemble<T> {
    pub fn new(models: BTreeMap<u8, Mps<T>>) -> Result<Self> {
        let n = match models.values().next() {
            Some(m) => m.n_sites(),
            None => return Err(Error::InvalidArgument("ensemble needs at least one model".into())),
        };
        for (label, m) in &models {
            if m.n_sites() != n {
                return Err(Error::LengthMismatch { expected: n, got: m.n_sites() });
            }
            if m.ortho_center().is_none() {
                return Err(Error::InvalidArgument(format!("model {label} is not canonical")));
            }
        }
        Ok(Self { models, log_thresholds: BTreeMap::new() })
    }

    pub fn labels(&self) -> Vec<u8> {
        self.models.keys().copied().collect()
    }

    pub fn model(&self, label: u8) -> Option<&Mps<T>> {
        self.models.get(&label)
    }

    pub fn models(&self) -> &BTreeMap<u8, Mps<T>> {
        &self.models
    }

    pub fn n_sites(&self) -> usize {
        self.models.values().next().map_or(0, Mps::n_sites)
    }

    pub fn set_log_threshold(&mut self, label: u8, log_epsilon: f64) -> Result<()> {
        if !self.models.contains_key(&label) {
            return Err(Error::InvalidArgument(format!("no model for label {label}")));
        }
        if log_epsilon.is_nan() || log_epsilon == f64::INFINITY {
            return Err(Error::InvalidArgument(format!("invalid log threshold {log_epsilon}")));
        }
        self.log_thresholds.insert(label, log_epsilon);
        Ok(())
    }

    pub fn log_threshold(&self, label: u8) -> Option<f64> {
        self.log_thresholds.get(&label).copied()
    }

    /// `ln |Psi_i(x)|^2` for every label, in label order.
    pub fn log_scores(&self, x: &BinaryImage) -> Result<Vec<f64>> {
        self.models.values().map(|m| log_prob(m, x)).collect()
    }

    pub fn classify(&self, x: &BinaryImage) -> Result<Prediction> {
        let labels = self.labels();
        Ok(match argmax(&self.log_scores(x)?) {
            Some(i) => Prediction::Label(labels[i]),
            None => Prediction::Unclassifiable,
        })
    }

    pub fn predict(&self, set: &Dataset) -> Result<Vec<Prediction>> {
        set.images().par_iter().map(|x| self.classify(x)).collect()
    }

    /// Accuracy and confusion matrix on a labelled set.
    pub fn evaluate(&self, set: &Dataset) -> Result<ClassificationReport> {
        let labels = self.labels();
        let predictions = self.predict(set)?;
        report(&labels, set, &predictions)
    }

    /// Membership of `x` in the full set of `label`, using its stored threshold.
    pub fn indicator(&self, label: u8, x: &BinaryImage) -> Result<bool> {
        let m = self.model(label).ok_or_else(|| Error::InvalidArgument(format!("no model for label {label}")))?;
        let t = self
            .log_threshold(label)
            .ok_or_else(|| Error::InvalidArgument(format!("no threshold for label {label}")))?;
        indicator(m, t, x)
    }

    /// Fit every label's threshold on `set`: images of that label against
    /// all others.
    pub fn calibrate(&mut self, set: &Dataset) -> Result<BTreeMap<u8, DiscriminationReport>> {
        let mut out = BTreeMap::new();
        for label in self.labels() {
            let pos = set.with_label(label);
            let neg = set.without_label(label);
            let r = calibrate_threshold(&self.models[&label], &pos, &neg)?;
            self.log_thresholds.insert(label, r.log_threshold);
            out.insert(label, r);
        }
        Ok(out)
    }

    pub fn thresholds_json(&self) -> String {
        let map: BTreeMap<String, ThresholdEntry> = self
            .log_thresholds
            .iter()
            .map(|(l, &t)| (l.to_string(), ThresholdEntry { threshold: t.exp(), log_threshold: t }))
            .collect();
        serde_json::to_string_pretty(&map).expect("threshold map serializes")
    }

    /// Write `model_<label>.mpsw` for each label and `thresholds.json`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (label, m) in &self.models {
            m.save(&dir.join(format!("model_{label}.mpsw")))?;
        }
        std::fs::write(dir.join("thresholds.json"), self.thresholds_json() + "\n")?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut models = BTreeMap::new();
        for label in 0..=9u8 {
            let p = dir.join(format!("model_{label}.mpsw"));
            if p.exists() {
                models.insert(label, Mps::load(&p)?);
            }
        }
        if models.is_empty() {
            return Err(Error::Format(format!("no model_<label>.mpsw files in {}", dir.display())));
        }
        let mut ens = Self::new(models)?;
        let tp = dir.join("thresholds.json");
        if tp.exists() {
            let map: BTreeMap<String, ThresholdEntry> = serde_json::from_str(&std::fs::read_to_string(&tp)?)
                .map_err(|e| Error::Format(format!("{}: {e}", tp.display())))?;
            for (k, v) in map {
                let label: u8 = k.parse().map_err(|_| Error::Format(format!("bad label {k:?} in thresholds")))?;
                ens.set_log_threshold(label, v.log_threshold)?;
            }
        }
        Ok(ens)
    }
}

fn report(labels: &[u8], set: &Dataset, predictions: &[Prediction]) -> Result<ClassificationReport> {
    let index = |l: u8| labels.iter().position(|&x| x == l);
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let (mut correct, mut unclassifiable) = (0, 0);
    for (k, (x, p)) in set.iter().zip(predictions).enumerate() {
        let truth = x.label.ok_or_else(|| Error::InvalidArgument(format!("image {k} has no label")))?;
        match *p {
            Prediction::Label(l) => {
                if l == truth {
                    correct += 1;
                }
                if let (Some(t), Some(q)) = (index(truth), index(l)) {
                    confusion[t][q] += 1;
                }
            }
            Prediction::Unclassifiable => unclassifiable += 1,
        }
    }
    let total = set.len();
    Ok(ClassificationReport {
        total,
        correct,
        accuracy: if total > 0 { correct as f64 / total as f64 } else { 0.0 },
        unclassifiable,
        labels: labels.to_vec(),
        confusion,
    })
}

/// Classification accuracy of models given as `(label, model)` pairs.
fn accuracy_of<T: Scalar>(models: &[(u8, &Mps<T>)], set: &Dataset) -> Result<f64> {
    let labels: Vec<u8> = models.iter().map(|m| m.0).collect();
    let predictions = set
        .images()
        .par_iter()
        .map(|x| {
            let scores = models.iter().map(|(_, m)| log_prob(m, x)).collect::<Result<Vec<_>>>()?;
            Ok(argmax(&scores).map_or(Prediction::Unclassifiable, |i| Prediction::Label(labels[i])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&labels, set, &predictions)?.accuracy)
}

/// Normalized ensemble probability `p_i = |Psi_i|^2 / sum_j |Psi_j|^2` of
/// one label, used as an image-quality score.
pub struct EnsembleOracle<'a, T: Scalar> {
    pub ensemble: &'a ClassifierEnsemble<T>,
    pub label: u8,
}

impl<T: Scalar> QualityOracle for EnsembleOracle<'_, T> {
    fn score(&self, x: &BinaryImage) -> Result<f64> {
        let labels = self.ensemble.labels();
        let i = labels
            .iter()
            .position(|&l| l == self.label)
            .ok_or_else(|| Error::InvalidArgument(format!("no model for label {}", self.label)))?;
        let s = self.ensemble.log_scores(x)?;
        let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let z: f64 = s.iter().map(|v| (v - m).exp()).sum();
        Ok((s[i] - m).exp() / z)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTrace {
    pub per_label: BTreeMap<u8, TrainTrace>,
    /// `(epoch, validation accuracy)`.
    pub accuracy: Vec<(usize, f64)>,
    pub selected_epoch: usize,
}

impl EnsembleTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,epoch,loss,e0,class_quality,entropy_plateau\n");
        for (label, t) in &self.per_label {
            for r in &t.records {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
                s.push_str(&format!(
                    "{label},{},{:.10e},{:.10e},{},{}\n",
                    r.epoch,
                    r.mean_loss,
                    r.e0_train,
                    opt(r.class_quality),
                    opt(r.plateau_entropy)
                ));
            }
        }
        s
    }
}

/// Train one model per label in lockstep, one epoch at a time.
///
/// With a validation set, ensemble accuracy is recorded after every epoch.
/// With `config.early_stop` as well, all models are returned at the shared
/// epoch of highest accuracy (earliest on ties), and training ends once
/// `config.patience` epochs pass without improvement.
pub fn train_ensemble<T: Scalar>(
    inits: BTreeMap<u8, Mps<T>>,
    train_sets: &BTreeMap<u8, Dataset>,
    validation: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<(ClassifierEnsemble<T>, EnsembleTrace)> {
    let mut trainers = Vec::with_capacity(inits.len());
    for (label, mps) in inits {
        let data = train_sets
            .get(&label)
            .ok_or_else(|| Error::InvalidArgument(format!("no training data for label {label}")))?;
        trainers.push((label, Trainer::new(mps, data, config.clone())?));
    }
    let mut trace = EnsembleTrace::default();
    let evaluate = |trainers: &[(u8, Trainer<'_, T>)], trace: &mut EnsembleTrace| -> Result<Option<f64>> {
        let acc = match validation {
            Some(v) => {
                let models: Vec<(u8, &Mps<T>)> = trainers.iter().map(|(l, t)| (*l, t.model())).collect();
                Some(accuracy_of(&models, v)?)
            }
            None => None,
        };
        for (label, t) in trainers {
            let mut rec = t.record()?;
            rec.class_quality = acc;
            trace.per_label.entry(*label).or_default().records.push(rec);
        }
        if let Some(a) = acc {
            trace.accuracy.push((trainers[0].1.epoch(), a));
        }
        Ok(acc)
    };
    let snapshot = |trainers: &[(u8, Trainer<'_, T>)]| -> BTreeMap<u8, Mps<T>> {
        trainers.iter().map(|(l, t)| (*l, t.model().clone())).collect()
    };
    let early = config.early_stop && validation.is_some();
    let first = evaluate(&trainers, &mut trace)?;
    let mut best = (first.unwrap_or(f64::NEG_INFINITY), 0, if early { Some(snapshot(&trainers)) } else { None });
    for epoch in 1..=config.max_epochs {
        for (label, t) in trainers.iter_mut() {
            t.run_epoch()?;
            log::info!("label {label}: epoch {epoch} done");
        }
        let acc = evaluate(&trainers, &mut trace)?.unwrap_or(f64::NEG_INFINITY);
        log::info!("epoch {epoch}: validation accuracy {acc:.4}");
        if early {
            if acc > best.0 {
                best = (acc, epoch, Some(snapshot(&trainers)));
            } else if epoch - best.1 > config.patience {
                break;
            }
        }
    }
    let models = match best.2 {
        Some(m) => {
            trace.selected_epoch = best.1;
            m
        }
        None => {
            trace.selected_epoch = trainers.first().map_or(0, |t| t.1.epoch());
            trainers.into_iter().map(|(l, t)| (l, t.into_model())).collect()
        }
    };
    for t in trace.per_label.values_mut() {
        t.selected_epoch = trace.selected_epoch;
    }
    Ok((ClassifierEnsemble::new(models)?, trace))
}
