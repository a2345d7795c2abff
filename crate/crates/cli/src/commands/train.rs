use std::collections::BTreeMap;

use datawave::analysis::EnergyStats;
use datawave::classify::{train_ensemble, DiscriminationMonitor, DiscriminationReport};
use datawave::train::{train, QualityMonitor};
use serde::Serialize;

use super::{csv, for_digit, initial_model, labels_of, n_sites};
use crate::args::{EnsembleArgs, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::run::{Invocation, Run};

#[derive(Serialize)]
struct TrainReport {
    digit: Option<u8>,
    images: usize,
    n_sites: usize,
    bond_dims_max: usize,
    epochs_run: usize,
    selected_epoch: usize,
    e0: f64,
    e_ground: f64,
    mean_energy: f64,
    v_bits: f64,
}

pub fn single(a: &TrainArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "train", a, &a.out.out)?;
    let cfg = a.opts.config()?;
    run.seed("train", cfg.seed);
    let data = for_digit(run.load_dataset("train", &a.data)?, a.digit)?;
    let mut monitor = match &a.validation {
        Some(p) => {
            let val = run.load_dataset("validation", p)?;
            let d = a.digit.ok_or_else(|| CliError::Usage("--validation needs --digit".into()))?;
            Some(DiscriminationMonitor { positives: val.with_label(d), negatives: val.without_label(d) })
        }
        None => None,
    };
    if cfg.early_stop && monitor.is_none() {
        return Err(CliError::Usage("--early-stop needs --validation".into()));
    }
    let n = n_sites(&data)?;
    let init = initial_model(a.opts.init, n, cfg.bond_cap, cfg.seed, 0)?;
    run.mark("load");
    let (model, trace) = train(init, &data, &cfg, monitor.as_mut().map(|m| m as &mut dyn QualityMonitor<f64>))?;
    run.mark("train");
    let stats = EnergyStats::of_dataset(&model, &data)?;
    run.write("model", "model.mpsw", &model.to_bytes())?;
    run.write("trace", "trace.csv", trace.to_csv().as_bytes())?;
    let report = TrainReport {
        digit: a.digit,
        images: data.len(),
        n_sites: n,
        bond_dims_max: model.max_bond(),
        epochs_run: trace.records.last().map_or(0, |r| r.epoch),
        selected_epoch: trace.selected_epoch,
        e0: stats.e0,
        e_ground: stats.e_ground,
        mean_energy: stats.mean_e,
        v_bits: stats.e0 / std::f64::consts::LN_2,
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct EnsembleReport {
    labels: Vec<u8>,
    images: BTreeMap<u8, usize>,
    selected_epoch: usize,
    validation_accuracy: Option<f64>,
    calibration: BTreeMap<u8, DiscriminationReport>,
}

pub fn ensemble(a: &EnsembleArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "train-ensemble", a, &a.out.out)?;
    let cfg = a.opts.config()?;
    run.seed("train", cfg.seed);
    let data = run.load_dataset("train", &a.data)?;
    let validation = match &a.validation {
        Some(p) => Some(run.load_dataset("validation", p)?),
        None => None,
    };
    if cfg.early_stop && validation.is_none() {
        return Err(CliError::Usage("--early-stop needs --validation".into()));
    }
    let labels = a.digits.clone().unwrap_or_else(|| labels_of(&data));
    if labels.is_empty() {
        return Err(CliError::Usage("training data carries no labels".into()));
    }
    let mut sets = BTreeMap::new();
    let mut inits = BTreeMap::new();
    for &l in &labels {
        let set = for_digit(data.clone(), Some(l))?;
        inits.insert(l, initial_model(a.opts.init, n_sites(&set)?, cfg.bond_cap, cfg.seed, l as u64)?);
        sets.insert(l, set);
    }
    run.mark("load");
    let (mut ens, trace) = train_ensemble(inits, &sets, validation.as_ref(), &cfg)?;
    run.mark("train");
    let calibration = match &validation {
        Some(v) => ens.calibrate(v)?,
        None => BTreeMap::new(),
    };
    run.mark("calibrate");
    ens.save_dir(run.out_dir())?;
    for &l in &labels {
        run.adopt("model", &format!("model_{l}.mpsw"))?;
    }
    run.adopt("thresholds", "thresholds.json")?;
    run.write("trace", "trace.csv", trace.to_csv().as_bytes())?;
    let acc_rows = trace.accuracy.iter().map(|(e, acc)| format!("{e},{acc:.10e}"));
    run.write("trace", "accuracy.csv", csv("epoch,accuracy", acc_rows).as_bytes())?;
    let report = EnsembleReport {
        images: sets.iter().map(|(l, s)| (*l, s.len())).collect(),
        labels,
        selected_epoch: trace.selected_epoch,
        validation_accuracy: trace.accuracy.iter().find(|(e, _)| *e == trace.selected_epoch).map(|p| p.1),
        calibration,
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}
