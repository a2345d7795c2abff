//! Full-set characteristics of a trained model: energies, set size, Hamming
//! geometry, intrinsic dimension, entanglement and the neat-image threshold.

mod energy;
mod fractal;
mod hamming;
mod kde;
mod neat;
mod page;
mod size;

pub use energy::{e0, energies, energy, Energy, EnergyStats};
pub use fractal::{doubling_schedule, fractal_dimension, mean_nearest_neighbour, FractalFit};
pub use hamming::{hamming_stats, HammingStats, DEFAULT_PAIR_BUDGET};
pub use kde::{silverman_bandwidth, Kde};
pub use neat::{neat_threshold, NeatOptions, NeatThreshold, QualityBin, QualityOracle, ScoreTable};
pub use page::{clamp_plateau, page_curve, PageCurve, DEFAULT_PLATEAU};
pub use size::{full_set_size, FullSetSize};
