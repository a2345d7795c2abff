mod analyze;
mod classify;
mod ingest;
mod rerun;
mod sample;
mod table1;
mod train;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use datawave::train::{BatchSize, TrainConfig};
use datawave::{Dataset, Mps};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{AnalyzeCommand, Command, Init, TrainOpts};
use crate::error::{CliError, CliResult};
use crate::run::Invocation;

pub fn execute(command: &Command, inv: &Invocation) -> CliResult<()> {
    match command {
        Command::Ingest(a) => ingest::run(a, inv),
        Command::Train(a) => train::single(a, inv),
        Command::TrainEnsemble(a) => train::ensemble(a, inv),
        Command::Sample(a) => sample::run(a, inv),
        Command::Analyze(c) => match c {
            AnalyzeCommand::Energy(a) => analyze::energy(a, inv),
            AnalyzeCommand::Size(a) => analyze::size(a, inv),
            AnalyzeCommand::Hamming(a) => analyze::hamming(a, inv),
            AnalyzeCommand::Fractal(a) => analyze::fractal(a, inv),
            AnalyzeCommand::Page(a) => analyze::page(a, inv),
            AnalyzeCommand::NeatThreshold(a) => analyze::neat(a, inv),
        },
        Command::Classify(a) => classify::classify(a, inv),
        Command::Discriminate(a) => classify::discriminate(a, inv),
        Command::ReproduceTable1(a) => table1::run(a, inv),
        Command::Rerun(a) => rerun::run(a, inv),
    }
}

fn pair<T: Copy>(v: &[T], flag: &str) -> CliResult<(T, T)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("--{flag} takes two values"))),
    }
}

impl TrainOpts {
    pub fn config(&self) -> CliResult<TrainConfig> {
        let cfg = TrainConfig {
            bond_cap: self.bond_dim,
            eta: self.eta,
            max_epochs: self.epochs,
            batch_size: if self.batch_size == 0 { BatchSize::Full } else { BatchSize::Mini(self.batch_size) },
            seed: self.seed,
            early_stop: self.early_stop,
            patience: self.patience,
            svd_cutoff: self.svd_cutoff,
            plateau: Some(pair(&self.plateau, "plateau")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Initial model; `stream` separates the draws of ensemble members.
fn initial_model(init: Init, n_sites: usize, bond_dim: usize, seed: u64, stream: u64) -> CliResult<Mps<f64>> {
    Ok(match init {
        Init::Uniform => Mps::uniform(n_sites, bond_dim)?,
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            Mps::random(n_sites, bond_dim, &mut rng)?
        }
    })
}

fn labels_of(set: &Dataset) -> Vec<u8> {
    set.iter().filter_map(|im| im.label).collect::<BTreeSet<_>>().into_iter().collect()
}

fn for_digit(set: Dataset, digit: Option<u8>) -> CliResult<Dataset> {
    let set = match digit {
        Some(d) => set.with_label(d),
        None => set,
    };
    if set.is_empty() {
        return Err(CliError::Usage(match digit {
            Some(d) => format!("no images with label {d}"),
            None => "dataset is empty".into(),
        }));
    }
    Ok(set)
}

fn n_sites(set: &Dataset) -> CliResult<usize> {
    set.n_sites().ok_or_else(|| CliError::Data("images of differing sizes in one dataset".into()))
}

fn dataset_bytes(set: &Dataset) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    set.write_to(&mut buf)?;
    Ok(buf)
}

/// `name,...` CSV body from rows already formatted.
fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    s
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

/// Files of an ensemble directory, in name order, for the input digests.
fn ensemble_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("ensemble directory {} not found", dir.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (name.starts_with("model_") && name.ends_with(".mpsw")) || name == "thresholds.json"
        })
        .collect();
    files.sort();
    Ok(files)
}

fn square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}
