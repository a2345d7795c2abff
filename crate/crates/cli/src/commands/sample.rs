use datawave::analysis::e0;
use datawave::sample::{Clamps, SampleLimits, SampleRequest, Sampler};
use serde::Serialize;

use super::{csv, dataset_bytes, pair, square_side};
use crate::args::{LimitOpts, SampleArgs};
use crate::error::{CliError, CliResult};
use crate::run::{Invocation, Run};

impl LimitOpts {
    pub fn limits(&self) -> SampleLimits {
        SampleLimits {
            probe_budget: self.probe_budget,
            min_acceptance: self.min_acceptance,
            max_attempts: self.max_attempts,
        }
    }
}

#[derive(Serialize)]
struct SampleReport {
    count: usize,
    attempts: u64,
    acceptance: f64,
    energy_window: Option<(f64, f64)>,
    clamped_sites: usize,
    e0: Option<f64>,
    mean_energy: Option<f64>,
    min_energy: Option<f64>,
}

pub fn run(a: &SampleArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "sample", a, &a.out.out)?;
    run.seed("sample", a.seed);
    let model = run.load_model("model", &a.model)?;
    let n = model.n_sites();
    let height = match a.height {
        Some(h) if h > 0 && n % h == 0 => h,
        Some(h) => return Err(CliError::Usage(format!("height {h} does not divide {n} sites"))),
        None => square_side(n).unwrap_or(1),
    };
    let sampler = Sampler::new(&model)?.with_shape(height, n / height)?;
    let mut req = SampleRequest { count: a.count, seed: a.seed, limits: a.limits.limits(), ..Default::default() };
    if let Some(p) = &a.clamp {
        let text = String::from_utf8(run.read_input("clamp", p)?)
            .map_err(|_| CliError::Data(format!("{} is not text", p.display())))?;
        req.clamped = Some(Clamps::parse(&text, n)?);
    }
    if let Some(w) = &a.e_window {
        req.energy_window = Some(pair(w, "e-window")?);
    }
    run.mark("load");
    let batch = sampler.sample_batch(&req)?;
    run.mark("sample");
    run.write("samples", "samples.bin", &dataset_bytes(&batch.dataset)?)?;
    let rows = batch.energies.iter().enumerate().map(|(i, e)| format!("{i},{e:.10e}"));
    run.write("energies", "energies.csv", csv("index,energy", rows).as_bytes())?;
    let mut grid = String::new();
    for (i, (x, e)) in batch.dataset.iter().zip(&batch.energies).take(a.grid).enumerate() {
        grid.push_str(&format!("# sample {i} energy {e:.4}\n{}\n", x.to_text_grid()));
    }
    run.write("grid", "samples.txt", grid.as_bytes())?;
    let es = &batch.energies;
    let report = SampleReport {
        count: es.len(),
        attempts: batch.attempts,
        acceptance: if batch.attempts > 0 { es.len() as f64 / batch.attempts as f64 } else { 0.0 },
        energy_window: req.energy_window,
        clamped_sites: req.clamped.as_ref().map_or(0, |c| c.len()),
        e0: (!es.is_empty()).then(|| e0(es)).transpose()?,
        mean_energy: (!es.is_empty()).then(|| es.iter().sum::<f64>() / es.len() as f64),
        min_energy: es.iter().copied().reduce(f64::min),
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}
