//! Likelihood training by two-site sweeps with norm-preserving rotation steps.

mod env;
mod gradient;
mod loss;
mod merged;
mod split;
mod trainer;
mod tsgo;

pub use gradient::two_site_gradient;
pub use loss::nll_loss;
pub use merged::MergedTensor;
pub use split::{split_truncate, CenterSide, SplitOutcome};
pub use trainer::{energy_summary, train, BatchSize, EpochRecord, QualityMonitor, TrainConfig, TrainTrace, Trainer};
pub use tsgo::tsgo_step;
