use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "datawave",
    version,
    about = "Matrix product state models of binary image data: training, sampling, analysis, classification",
    args_override_self = true
)]
pub struct Cli {
    /// TOML file of flag values for the subcommand; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Read IDX files, binarize, and write dataset containers.
    Ingest(IngestArgs),
    /// Train one model on one digit.
    Train(TrainArgs),
    /// Train one model per digit in lockstep and calibrate thresholds.
    TrainEnsemble(EnsembleArgs),
    /// Draw exact samples from a model.
    Sample(SampleArgs),
    /// Full-set characteristics of a model or dataset.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Argmax classification with a model ensemble.
    Classify(ClassifyArgs),
    /// Single-model membership test with a calibrated threshold.
    Discriminate(DiscriminateArgs),
    /// Per-digit table of V, mean Hamming distance, dimension, black pixels and plateau entropy.
    ReproduceTable1(Table1Args),
    /// Re-execute a recorded run and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyzeCommand {
    /// Energy statistics, E0 and smoothed densities.
    Energy(EnergyArgs),
    /// Full-set size V and its density correction.
    Size(SizeArgs),
    /// Pairwise Hamming distances and black-pixel counts.
    Hamming(HammingArgs),
    /// Nearest-neighbour scaling dimension.
    Fractal(FractalArgs),
    /// Entanglement entropy at every cut.
    Page(PageArgs),
    /// Energy above which samples stop looking like the digit.
    NeatThreshold(NeatArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetName {
    Train,
    Test,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Random,
    Uniform,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutArg {
    /// Output directory; nothing is written outside it.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IngestArgs {
    /// Which MNIST split to read from the data directory.
    #[arg(long, value_enum, default_value_t = SetName::Train)]
    pub set: SetName,
    /// Directory holding the IDX files (optionally gzipped).
    #[arg(long, env = "DATAWAVE_DATA_DIR", default_value = "data/mnist")]
    pub data_dir: PathBuf,
    /// Image file, overriding the data directory.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Label file, overriding the data directory.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Gray level at or above which a pixel is stroke.
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    /// Keep only these digits.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = ArgAction::Set)]
    pub digits: Option<Vec<u8>>,
    /// Keep the first N images of each digit, in file order.
    #[arg(long)]
    pub per_digit: Option<usize>,
    /// Fraction moved to a validation set by seeded shuffle.
    #[arg(long, default_value_t = 0.0)]
    pub split_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainOpts {
    /// Bond dimension cap D.
    #[arg(long, default_value_t = 100)]
    pub bond_dim: usize,
    /// Rotation angle per update, radians.
    #[arg(long, default_value_t = std::f64::consts::PI / 36.0)]
    pub eta: f64,
    /// Maximum number of epochs (sweep pairs).
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Mini-batch size per bond update; 0 uses the whole set.
    #[arg(long, default_value_t = 0)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the epoch of best validation quality.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = ArgAction::Set)]
    pub early_stop: bool,
    #[arg(long, default_value_t = 2)]
    pub patience: usize,
    /// Relative singular value cutoff.
    #[arg(long, default_value_t = 1e-12)]
    pub svd_cutoff: f64,
    /// Cut range for the plateau entropy recorded each epoch.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [200, 600], action = ArgAction::Set)]
    pub plateau: Vec<usize>,
    /// Initial state.
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainArgs {
    /// Dataset container.
    #[arg(long)]
    pub data: PathBuf,
    /// Train on images of this digit only.
    #[arg(long)]
    pub digit: Option<u8>,
    /// Labeled held-out set for the discrimination monitor.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[command(flatten)]
    pub opts: TrainOpts,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out set for accuracy tracking and threshold calibration.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Digits to model; default is every label in the data.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = ArgAction::Set)]
    pub digits: Option<Vec<u8>>,
    #[command(flatten)]
    pub opts: TrainOpts,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LimitOpts {
    /// Draws before the acceptance rate is checked.
    #[arg(long, default_value_t = 100_000)]
    pub probe_budget: u64,
    /// Smallest acceptance rate worth pursuing.
    #[arg(long, default_value_t = 1e-6)]
    pub min_acceptance: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_attempts: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File of `site bit` lines fixing pixels.
    #[arg(long)]
    pub clamp: Option<PathBuf>,
    /// Keep samples with energy in [LO, HI].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, action = ArgAction::Set)]
    pub e_window: Option<Vec<f64>>,
    /// Image height; width is sites / height. Defaults to square images when possible.
    #[arg(long)]
    pub height: Option<usize>,
    /// Number of samples dumped as text grids.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
    #[command(flatten)]
    pub limits: LimitOpts,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EnergyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset containers to evaluate.
    #[arg(long, num_args = 1.., action = ArgAction::Set)]
    pub data: Vec<PathBuf>,
    /// Also evaluate this many exact samples.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points in each density grid.
    #[arg(long, default_value_t = 256)]
    pub grid_points: usize,
    /// Kernel bandwidth; default is Silverman's rule.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Training set fixing E0 and the ground energy.
    #[arg(long)]
    pub data: PathBuf,
    /// Samples for the density at E0.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Width of the neat energy band, nats.
    #[arg(long, default_value_t = 1.0, conflicts_with = "epsilon")]
    pub delta_e: f64,
    /// Energy threshold; the band width becomes epsilon minus the ground energy.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HammingArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub digit: Option<u8>,
    /// Random pairs drawn when the set has more pairs than this.
    #[arg(long, default_value_t = datawave::analysis::DEFAULT_PAIR_BUDGET)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FractalOpts {
    #[arg(long, default_value_t = 64)]
    pub k_min: usize,
    #[arg(long, default_value_t = 4096)]
    pub k_max: usize,
    /// Half-width in nats of the energy window around E0 for sampled points.
    #[arg(long, default_value_t = 5.0)]
    pub window: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FractalArgs {
    /// Reference set; with --model it only fixes E0.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub digit: Option<u8>,
    /// Use samples of this model with energy near E0 instead of the data.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub fractal: FractalOpts,
    #[command(flatten)]
    pub limits: LimitOpts,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PageArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [200, 600], action = ArgAction::Set)]
    pub plateau: Vec<usize>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NeatArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Ensemble directory whose normalized probabilities score quality.
    #[arg(long, required_unless_present = "scores", conflicts_with = "scores")]
    pub ensemble: Option<PathBuf>,
    /// Label scored by the ensemble oracle.
    #[arg(long, requires = "ensemble")]
    pub label: Option<u8>,
    /// CSV of `key,score` rows from an external oracle.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Training set whose E0 starts the energy grid.
    #[arg(long)]
    pub data: PathBuf,
    /// Start the grid here instead of at the data E0.
    #[arg(long, allow_negative_numbers = true)]
    pub e_start: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub e_step: f64,
    #[arg(long, default_value_t = 20)]
    pub e_steps: usize,
    #[arg(long, default_value_t = 50)]
    pub samples_per_bin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub limits: LimitOpts,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassifyArgs {
    /// Directory with model_<label>.mpsw files and thresholds.json.
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DiscriminateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Members of the class.
    #[arg(long)]
    pub pos: PathBuf,
    /// Non-members.
    #[arg(long)]
    pub neg: PathBuf,
    /// Keep only images with this label from --pos and drop them from --neg.
    #[arg(long)]
    pub digit: Option<u8>,
    /// Evaluate this ln-threshold instead of calibrating one.
    #[arg(long, allow_negative_numbers = true)]
    pub log_threshold: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Table1Args {
    /// Labeled training container; default reads the IDX files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, env = "DATAWAVE_DATA_DIR", default_value = "data/mnist")]
    pub data_dir: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0u8, 1, 2, 3, 4, 5, 6, 7, 8, 9], action = ArgAction::Set)]
    pub digits: Vec<u8>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [100usize], action = ArgAction::Set)]
    pub bond_dims: Vec<usize>,
    /// Number of seeds per (digit, D), numbered from --seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training images per digit.
    #[arg(long, default_value_t = 2000)]
    pub per_digit: usize,
    #[arg(long, default_value_t = std::f64::consts::PI / 36.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 6)]
    pub epochs: usize,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [200, 600], action = ArgAction::Set)]
    pub plateau: Vec<usize>,
    #[arg(long, default_value_t = datawave::analysis::DEFAULT_PAIR_BUDGET)]
    pub pairs: usize,
    #[command(flatten)]
    pub fractal: FractalOpts,
    /// Draws before the near-E0 acceptance rate is checked.
    #[arg(long, default_value_t = 20_000)]
    pub probe_budget: u64,
    /// Below this near-E0 acceptance rate the dimension is skipped.
    #[arg(long, default_value_t = 1e-3)]
    pub min_acceptance: f64,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_attempts: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RerunArgs {
    /// manifest.json of the run to repeat.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}
