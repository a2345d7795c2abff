use datawave::analysis::{doubling_schedule, fractal_dimension, hamming_stats, page_curve, EnergyStats};
use datawave::sample::SampleLimits;
use datawave::train::{train, TrainConfig};
use serde::Serialize;

use super::analyze::near_e0_points;
use super::ingest::read_mnist;
use super::{csv, initial_model, n_sites, pair};
use crate::args::{Init, SetName, Table1Args};
use crate::error::{CliError, CliResult};
use crate::run::{Invocation, Run};

#[derive(Debug, Clone, Serialize)]
pub struct Table1Run {
    pub digit: u8,
    pub bond_dim: usize,
    pub seed: u64,
    pub e0: f64,
    pub v_bits: f64,
    pub delta: Option<f64>,
    pub slope: Option<f64>,
    /// Why the dimension is missing, when it is.
    pub delta_error: Option<String>,
    pub s_bar: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Spread {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Some(Self { mean, std: var.sqrt(), count: v.len() })
    }
}

/// One table row. `v`, `delta` and `s_bar` spread over seeds and bond
/// dimensions; the Hamming spread is the standard deviation over pairs.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub digit: u8,
    pub images: usize,
    pub v: Option<Spread>,
    pub mean_hamming: f64,
    pub std_hamming: f64,
    pub random_baseline: f64,
    pub delta: Option<Spread>,
    pub n_black: f64,
    pub s_bar: Option<Spread>,
}

#[derive(Serialize)]
struct Table1 {
    rows: Vec<Table1Row>,
    runs: Vec<Table1Run>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

pub fn run(a: &Table1Args, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "reproduce-table1", a, &a.out.out)?;
    run.seed("first", a.seed);
    if a.seeds == 0 || a.bond_dims.is_empty() || a.digits.is_empty() {
        return Err(CliError::Usage("need at least one digit, bond dimension and seed".into()));
    }
    let data = match &a.data {
        Some(p) => run.load_dataset("train", p)?,
        None => read_mnist(&mut run, &a.data_dir, SetName::Train, a.threshold)?,
    };
    let plateau = pair(&a.plateau, "plateau")?;
    let limits = SampleLimits { probe_budget: a.probe_budget, min_acceptance: a.min_acceptance, max_attempts: a.max_attempts };
    run.mark("load");
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &digit in &a.digits {
        let set = data.with_label(digit).take(a.per_digit);
        if set.len() < 2 {
            return Err(CliError::Usage(format!("digit {digit} has {} images", set.len())));
        }
        let n = n_sites(&set)?;
        let ham = hamming_stats(&set, a.pairs, a.seed)?;
        let mut digit_runs = Vec::new();
        for &bond_dim in &a.bond_dims {
            for seed in a.seed..a.seed + a.seeds {
                let cfg = TrainConfig {
                    bond_cap: bond_dim,
                    eta: a.eta,
                    max_epochs: a.epochs,
                    seed,
                    plateau: Some(plateau),
                    ..TrainConfig::default()
                };
                let init = initial_model(Init::Random, n, bond_dim, seed, digit as u64)?;
                let (model, _) = train(init, &set, &cfg, None)?;
                let stats = EnergyStats::of_dataset(&model, &set)?;
                let fit = near_e0_points(&model, stats.e0, &a.fractal, seed, limits).and_then(|pts| {
                    Ok(fractal_dimension(&pts, &doubling_schedule(a.fractal.k_min, a.fractal.k_max), seed)?)
                });
                let s_bar = page_curve(&model, plateau)?.s_bar;
                run.write("model", &format!("models/digit{digit}_d{bond_dim}_seed{seed}.mpsw"), &model.to_bytes())?;
                let (delta, slope, delta_error) = match fit {
                    Ok(f) => (Some(f.delta), Some(f.slope), None),
                    Err(e) => {
                        log::warn!("digit {digit} D {bond_dim} seed {seed}: no dimension: {e}");
                        (None, None, Some(e.to_string()))
                    }
                };
                log::info!("digit {digit} D {bond_dim} seed {seed}: E0 {:.3} S {s_bar:.3} delta {delta:?}", stats.e0);
                digit_runs.push(Table1Run {
                    digit,
                    bond_dim,
                    seed,
                    e0: stats.e0,
                    v_bits: stats.e0 / std::f64::consts::LN_2,
                    delta,
                    slope,
                    delta_error,
                    s_bar,
                });
            }
        }
        run.mark(&format!("digit {digit}"));
        rows.push(Table1Row {
            digit,
            images: set.len(),
            v: Spread::of(digit_runs.iter().map(|r| r.v_bits)),
            mean_hamming: ham.mean_pairwise,
            std_hamming: ham.std_pairwise,
            random_baseline: ham.random_baseline,
            delta: Spread::of(digit_runs.iter().filter_map(|r| r.delta)),
            n_black: set.mean_black_pixels(),
            s_bar: Spread::of(digit_runs.iter().map(|r| r.s_bar)),
        });
        runs.extend(digit_runs);
    }
    let run_rows = runs.iter().map(|r| {
        format!(
            "{},{},{},{:.10e},{:.10e},{},{},{:.10e}",
            r.digit,
            r.bond_dim,
            r.seed,
            r.e0,
            r.v_bits,
            opt(r.delta),
            opt(r.slope),
            r.s_bar
        )
    });
    run.write("runs", "table1_runs.csv", csv("digit,bond_dim,seed,e0,v_bits,delta,slope,s_bar", run_rows).as_bytes())?;
    let spread = |s: &Option<Spread>| match s {
        Some(s) => format!("{:.10e},{:.10e}", s.mean, s.std),
        None => ",".into(),
    };
    let table_rows = rows.iter().map(|r| {
        format!(
            "{},{},{},{:.10e},{:.10e},{},{:.10e},{}",
            r.digit,
            r.images,
            spread(&r.v),
            r.mean_hamming,
            r.std_hamming,
            spread(&r.delta),
            r.n_black,
            spread(&r.s_bar)
        )
    });
    let header = "digit,images,v_mean,v_std,hamming_mean,hamming_std,delta_mean,delta_std,n_black,s_bar_mean,s_bar_std";
    run.write("table", "table1.csv", csv(header, table_rows).as_bytes())?;
    run.write_json("report", "table1.json", &Table1 { rows, runs })?;
    run.finish()?;
    Ok(())
}
