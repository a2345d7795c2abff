use datawave::analysis::{
    doubling_schedule, fractal_dimension, full_set_size, hamming_stats, neat_threshold, page_curve, EnergyStats,
    FractalFit, FullSetSize, HammingStats, Kde, NeatOptions, QualityOracle, ScoreTable,
};
use datawave::classify::{ClassifierEnsemble, EnsembleOracle};
use datawave::sample::{SampleLimits, SampleRequest, Sampler};
use datawave::{Dataset, Error, Mps, SplitTag};
use serde::Serialize;

use super::{csv, ensemble_files, for_digit, pair, stem};
use crate::args::{EnergyArgs, FractalArgs, FractalOpts, HammingArgs, NeatArgs, PageArgs, SizeArgs};
use crate::error::{CliError, CliResult};
use crate::run::{Invocation, Run};

const KDE_PAD: f64 = 3.0;

#[derive(Serialize)]
struct SetEnergy {
    name: String,
    set_tag: SplitTag,
    count: usize,
    e0: f64,
    e_ground: f64,
    mean_e: f64,
    std_e: f64,
    bandwidth: Option<f64>,
    jensen: bool,
}

#[derive(Serialize)]
struct EnergyReport {
    sets: Vec<SetEnergy>,
}

fn sampled_energies(model: &Mps<f64>, count: usize, seed: u64, window: Option<(f64, f64)>, limits: SampleLimits) -> CliResult<(Dataset, Vec<f64>)> {
    let req = SampleRequest { count, seed, energy_window: window, limits, ..Default::default() };
    let batch = Sampler::new(model)?.sample_batch(&req)?;
    Ok((batch.dataset, batch.energies))
}

pub fn energy(a: &EnergyArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze energy", a, &a.out.out)?;
    let model = run.load_model("model", &a.model)?;
    let mut sets = Vec::new();
    for p in &a.data {
        let data = run.load_dataset("data", p)?;
        sets.push((stem(p), EnergyStats::of_dataset(&model, &data)?));
    }
    if a.samples > 0 {
        run.seed("sample", a.seed);
        let (_, es) = sampled_energies(&model, a.samples, a.seed, None, SampleLimits::default())?;
        sets.push(("sampled".into(), EnergyStats::from_energies(es, SplitTag::Sampled)?));
    }
    if sets.is_empty() {
        return Err(CliError::Usage("nothing to evaluate: give --data or --samples".into()));
    }
    run.mark("energies");
    let mut energy_rows = Vec::new();
    let mut density_rows = Vec::new();
    let mut report = EnergyReport { sets: Vec::new() };
    for (name, s) in &sets {
        energy_rows.extend(s.energies.iter().enumerate().map(|(i, e)| format!("{name},{i},{e:.10e}")));
        let bandwidth = if s.len() >= 2 {
            let kde = Kde::new(s.energies.clone(), a.bandwidth)?;
            density_rows.extend(kde.grid(a.grid_points, KDE_PAD).into_iter().map(|(e, d)| format!("{name},{e:.10e},{d:.10e}")));
            Some(kde.bandwidth())
        } else {
            None
        };
        report.sets.push(SetEnergy {
            name: name.clone(),
            set_tag: s.set_tag,
            count: s.len(),
            e0: s.e0,
            e_ground: s.e_ground,
            mean_e: s.mean_e,
            std_e: s.std_e,
            bandwidth,
            jensen: s.e_ground <= s.e0 && s.e0 <= s.mean_e,
        });
    }
    run.write("energies", "energies.csv", csv("set,index,energy", energy_rows).as_bytes())?;
    run.write("density", "density.csv", csv("set,energy,density", density_rows).as_bytes())?;
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct SizeReport {
    e0: f64,
    e_ground: f64,
    samples: usize,
    bandwidth: f64,
    rho_at_e0: f64,
    size: FullSetSize,
}

pub fn size(a: &SizeArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze size", a, &a.out.out)?;
    run.seed("sample", a.seed);
    let model = run.load_model("model", &a.model)?;
    let data = run.load_dataset("data", &a.data)?;
    let stats = EnergyStats::of_dataset(&model, &data)?;
    let (_, es) = sampled_energies(&model, a.samples, a.seed, None, SampleLimits::default())?;
    let kde = Kde::new(es, None)?;
    let rho = kde.density(stats.e0);
    let delta_e = a.epsilon.map_or(a.delta_e, |eps| eps - stats.e_ground);
    let mut size = full_set_size(stats.e0, rho, delta_e)?;
    if let Some(eps) = a.epsilon {
        size = size.with_threshold(eps);
    }
    let report = SizeReport {
        e0: stats.e0,
        e_ground: stats.e_ground,
        samples: a.samples,
        bandwidth: kde.bandwidth(),
        rho_at_e0: rho,
        size,
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

pub fn hamming(a: &HammingArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze hamming", a, &a.out.out)?;
    run.seed("pairs", a.seed);
    let data = for_digit(run.load_dataset("data", &a.data)?, a.digit)?;
    let stats: HammingStats = hamming_stats(&data, a.pairs, a.seed)?;
    run.write_json("report", "report.json", &stats)?;
    run.finish()?;
    Ok(())
}

/// Samples of `model` with energy within `opts.window` of `e0`.
pub fn near_e0_points(model: &Mps<f64>, e0: f64, opts: &FractalOpts, seed: u64, limits: SampleLimits) -> CliResult<Dataset> {
    let (set, _) = sampled_energies(model, opts.k_max, seed, Some((e0 - opts.window, e0 + opts.window)), limits)?;
    Ok(set)
}

#[derive(Serialize)]
struct FractalReport {
    source: &'static str,
    points: usize,
    e0: Option<f64>,
    window: Option<(f64, f64)>,
    fit: FractalFit,
}

pub fn fractal(a: &FractalArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze fractal", a, &a.out.out)?;
    run.seed("fractal", a.seed);
    let data = for_digit(run.load_dataset("data", &a.data)?, a.digit)?;
    let (source, points, e0) = match &a.model {
        Some(p) => {
            let model = run.load_model("model", p)?;
            let e0 = EnergyStats::of_dataset(&model, &data)?.e0;
            ("sampled", near_e0_points(&model, e0, &a.fractal, a.seed, a.limits.limits())?, Some(e0))
        }
        None => ("data", data, None),
    };
    run.mark("points");
    let fit = fractal_dimension(&points, &doubling_schedule(a.fractal.k_min, a.fractal.k_max), a.seed)?;
    run.mark("fit");
    run.write("fit", "fractal.csv", fit.to_csv().as_bytes())?;
    let report = FractalReport {
        source,
        points: points.len(),
        window: e0.map(|e| (e - a.fractal.window, e + a.fractal.window)),
        e0,
        fit,
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct PageReport {
    s_bar: f64,
    plateau_range: (usize, usize),
    s_max: f64,
    /// Largest `S_k - ln(bond_k)`; never positive.
    bound_margin: f64,
}

pub fn page(a: &PageArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze page", a, &a.out.out)?;
    let model = run.load_model("model", &a.model)?;
    let curve = page_curve(&model, pair(&a.plateau, "plateau")?)?;
    run.write("page", "page.csv", curve.to_csv().as_bytes())?;
    let margin = curve
        .s_k
        .iter()
        .zip(&curve.bonds)
        .map(|(s, &b)| s - (b as f64).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let report = PageReport {
        s_bar: curve.s_bar,
        plateau_range: curve.plateau_range,
        s_max: curve.s_k.iter().copied().fold(0.0, f64::max),
        bound_margin: margin,
    };
    run.write_json("report", "report.json", &report)?;
    run.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct NeatReport {
    e0: f64,
    e_ground: f64,
    epsilon_star: f64,
    delta_e: f64,
    reference_mean: f64,
    reference_std: f64,
}

pub fn neat(a: &NeatArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "analyze neat-threshold", a, &a.out.out)?;
    run.seed("sample", a.seed);
    let model = run.load_model("model", &a.model)?;
    let data = run.load_dataset("data", &a.data)?;
    let stats = EnergyStats::of_dataset(&model, &data)?;
    let start = a.e_start.unwrap_or(stats.e0);
    let grid: Vec<f64> = (0..a.e_steps).map(|i| start + a.e_step * i as f64).collect();
    let ens;
    let oracle: Box<dyn QualityOracle + '_> = match (&a.ensemble, &a.scores) {
        (Some(dir), _) => {
            for f in ensemble_files(dir)? {
                run.read_input("ensemble", &f)?;
            }
            ens = ClassifierEnsemble::<f64>::load_dir(dir)?;
            let label = a.label.ok_or_else(|| CliError::Usage("--ensemble needs --label".into()))?;
            Box::new(EnsembleOracle { ensemble: &ens, label })
        }
        (None, Some(p)) => {
            let text = String::from_utf8(run.read_input("scores", p)?)
                .map_err(|_| CliError::Data(format!("{} is not text", p.display())))?;
            Box::new(ScoreTable::parse(&text)?)
        }
        (None, None) => return Err(CliError::Usage("give --ensemble or --scores".into())),
    };
    let opts = NeatOptions { samples_per_bin: a.samples_per_bin, seed: a.seed, limits: a.limits.limits() };
    let header = "energy,lower,mean,std,samples";
    match neat_threshold(&model, oracle.as_ref(), &grid, opts) {
        Ok(r) => {
            let rows = r
                .profile
                .iter()
                .map(|b| format!("{:.10e},{:.10e},{:.10e},{:.10e},{}", b.energy, b.lower, b.mean, b.std, b.samples));
            run.write("profile", "profile.csv", csv(header, rows).as_bytes())?;
            let report = NeatReport {
                e0: stats.e0,
                e_ground: stats.e_ground,
                epsilon_star: r.epsilon_star,
                delta_e: r.epsilon_star - stats.e_ground,
                reference_mean: r.reference_mean,
                reference_std: r.reference_std,
            };
            run.write_json("report", "report.json", &report)?;
            run.finish()?;
            Ok(())
        }
        Err(Error::ThresholdNotFound { profile }) => {
            let rows = profile.iter().map(|(e, m, s)| format!("{e:.10e},,{m:.10e},{s:.10e},{}", a.samples_per_bin));
            run.write("profile", "profile.csv", csv(header, rows).as_bytes())?;
            run.finish()?;
            Err(Error::ThresholdNotFound { profile }.into())
        }
        Err(e) => Err(e.into()),
    }
}
