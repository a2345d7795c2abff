//! Matrix product state "wavefunctions" of binary image data.
//!
//! A trained [`Mps`] assigns every black-and-white image `x` an amplitude
//! `Psi(x)` with `sum_x |Psi(x)|^2 = 1`. The same object serves as an exact
//! sampler ([`sample`]), a discriminator and ten-way classifier ([`classify`]),
//! and the subject of full-set analysis ([`analysis`]): energies
//! `E(x) = -ln |Psi(x)|^2`, the soft-minimum energy `E0`, set size in bits,
//! Hamming geometry, intrinsic dimension and entanglement entropy.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! [`Mps64`] and [`Mps32`] name the concrete instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classify;
pub mod data;
pub mod error;
mod linalg;
pub mod mps;
pub mod sample;
mod scalar;
pub mod train;

pub use data::{BinaryImage, Dataset, SplitTag};
pub use error::{Error, ErrorKind, Result};
pub use mps::{Bipartition, LogAmplitude, Mps, SchmidtSpectrum, SiteTensor};
pub use scalar::Scalar;
pub use train::{train, TrainConfig};

/// Double-precision MPS, the default everywhere.
pub type Mps64 = Mps<f64>;
/// Single-precision MPS.
pub type Mps32 = Mps<f32>;
