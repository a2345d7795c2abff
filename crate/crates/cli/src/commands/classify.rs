use datawave::classify::{calibrate_scores, evaluate_scores, log_probs, ClassifierEnsemble, DiscriminationReport, Prediction};
use serde::Serialize;

use super::{csv, ensemble_files};
use crate::args::{ClassifyArgs, DiscriminateArgs};
use crate::error::CliResult;
use crate::run::{Invocation, Run};

pub fn classify(a: &ClassifyArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "classify", a, &a.out.out)?;
    for f in ensemble_files(&a.ensemble)? {
        run.read_input("ensemble", &f)?;
    }
    let ens = ClassifierEnsemble::<f64>::load_dir(&a.ensemble)?;
    let data = run.load_dataset("data", &a.data)?;
    run.mark("load");
    let predictions = ens.predict(&data)?;
    let report = ens.evaluate(&data)?;
    run.mark("classify");
    let rows = data.iter().zip(&predictions).enumerate().map(|(i, (x, p))| {
        let truth = x.label.map(|l| l.to_string()).unwrap_or_default();
        let pred = match p {
            Prediction::Label(l) => l.to_string(),
            Prediction::Unclassifiable => "unclassifiable".into(),
        };
        format!("{i},{truth},{pred}")
    });
    run.write("predictions", "predictions.csv", csv("index,label,prediction", rows).as_bytes())?;
    let mut cells = Vec::new();
    for (i, t) in report.labels.iter().enumerate() {
        for (j, p) in report.labels.iter().enumerate() {
            cells.push(format!("{t},{p},{}", report.confusion[i][j]));
        }
    }
    run.write("confusion", "confusion.csv", csv("label,prediction,count", cells).as_bytes())?;
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct DiscriminateOutput {
    positives: usize,
    negatives: usize,
    calibrated: bool,
    #[serde(flatten)]
    report: DiscriminationReport,
}

pub fn discriminate(a: &DiscriminateArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "discriminate", a, &a.out.out)?;
    let model = run.load_model("model", &a.model)?;
    let mut pos = run.load_dataset("positives", &a.pos)?;
    let mut neg = run.load_dataset("negatives", &a.neg)?;
    if let Some(d) = a.digit {
        pos = pos.with_label(d);
        neg = neg.without_label(d);
    }
    let ps = log_probs(&model, &pos)?;
    let ns = log_probs(&model, &neg)?;
    let report = match a.log_threshold {
        Some(t) => evaluate_scores(&ps, &ns, t),
        None => calibrate_scores(&ps, &ns)?,
    };
    let rows = ps
        .iter()
        .map(|s| ("positive", s))
        .chain(ns.iter().map(|s| ("negative", s)))
        .map(|(set, s)| format!("{set},{s:.10e}"));
    run.write("scores", "scores.csv", csv("set,log_prob", rows).as_bytes())?;
    let out = DiscriminateOutput { positives: ps.len(), negatives: ns.len(), calibrated: a.log_threshold.is_none(), report };
    run.write_json("report", "report.json", &out)?;
    run.finish()?;
    Ok(())
}
