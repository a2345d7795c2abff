//! Dataset ingestion, binarization, splitting and persistence.

mod dataset;
pub mod idx;
mod image;

pub use dataset::{Dataset, SplitTag};
pub use image::{binarize, encode, hamming_distance, BasisState, BinaryImage, GrayImage, PackedBits};
