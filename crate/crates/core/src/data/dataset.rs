use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::image::{binarize, BinaryImage, GrayImage};
use crate::error::{Error, Result};

/// Where a dataset came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
    Sampled,
}

impl SplitTag {
    fn code(self) -> u8 {
        match self {
            SplitTag::Train => 0,
            SplitTag::Validation => 1,
            SplitTag::Test => 2,
            SplitTag::Sampled => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => SplitTag::Train,
            1 => SplitTag::Validation,
            2 => SplitTag::Test,
            3 => SplitTag::Sampled,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
            SplitTag::Sampled => "sampled",
        }
    }
}

impl std::str::FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "validation" => Ok(SplitTag::Validation),
            "test" => Ok(SplitTag::Test),
            "sampled" => Ok(SplitTag::Sampled),
            _ => Err(Error::InvalidArgument(format!("unknown split tag {s:?}"))),
        }
    }
}

/// A collection of equally shaped binary images.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<BinaryImage>,
    pub split: SplitTag,
}

impl Dataset {
    pub fn new(images: Vec<BinaryImage>, split: SplitTag) -> Result<Self> {
        if let Some(first) = images.first() {
            let shape = first.shape();
            if let Some(bad) = images.iter().position(|im| im.shape() != shape) {
                return Err(Error::InvalidArgument(format!(
                    "image {bad} has shape {:?}, expected {shape:?}",
                    images[bad].shape()
                )));
            }
        }
        Ok(Self { images, split })
    }

    pub fn empty(split: SplitTag) -> Self {
        Self { images: Vec::new(), split }
    }

    /// Binarize a set of grayscale images at a fixed threshold.
    pub fn from_gray(images: &[GrayImage], threshold: u8, split: SplitTag) -> Result<Self> {
        Self::new(images.iter().map(|g| binarize(g, threshold)).collect(), split)
    }

    pub fn images(&self) -> &[BinaryImage] {
        &self.images
    }

    pub fn into_images(self) -> Vec<BinaryImage> {
        self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.images.first().map(BinaryImage::shape)
    }

    /// Pixel count per image, if any image is present.
    pub fn n_sites(&self) -> Option<usize> {
        self.images.first().map(BinaryImage::len)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BinaryImage> {
        self.images.iter()
    }

    /// Images carrying the given label.
    pub fn with_label(&self, label: u8) -> Dataset {
        self.filter(|im| im.label == Some(label))
    }

    /// Images whose label differs from `label`.
    pub fn without_label(&self, label: u8) -> Dataset {
        self.filter(|im| im.label.is_some() && im.label != Some(label))
    }

    pub fn filter(&self, pred: impl Fn(&BinaryImage) -> bool) -> Dataset {
        Dataset { images: self.images.iter().filter(|im| pred(im)).cloned().collect(), split: self.split }
    }

    /// First `n` images (or all of them).
    pub fn take(&self, n: usize) -> Dataset {
        Dataset { images: self.images.iter().take(n).cloned().collect(), split: self.split }
    }

    /// Seeded shuffle then partition: the first part holds `round(fraction * len)` images.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("split fraction {fraction} not in (0, 1)")));
        }
        if self.is_empty() {
            return Err(Error::InvalidArgument("cannot split an empty dataset".into()));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cut = (fraction * self.len() as f64).round() as usize;
        let pick = |idx: &[usize], split| Dataset {
            images: idx.iter().map(|&i| self.images[i].clone()).collect(),
            split,
        };
        Ok((pick(&order[..cut], self.split), pick(&order[cut..], SplitTag::Validation)))
    }

    /// Mean number of stroke pixels per image.
    pub fn mean_black_pixels(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.images.iter().map(|im| im.count_ones() as f64).sum::<f64>() / self.len() as f64
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let (h, wd) = self.shape().unwrap_or((0, 0));
        w.write_all(DATASET_MAGIC)?;
        w.write_all(&DATASET_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(h as u32).to_le_bytes())?;
        w.write_all(&(wd as u32).to_le_bytes())?;
        w.write_all(&[self.split.code(), 0, 0, 0])?;
        let stride = (h * wd).div_ceil(8);
        let mut packed = vec![0u8; stride];
        for im in &self.images {
            packed.iter_mut().for_each(|b| *b = 0);
            for (i, &bit) in im.bits().iter().enumerate() {
                packed[i / 8] |= bit << (7 - i % 8);
            }
            w.write_all(&packed)?;
        }
        let labels: Vec<u8> = self.images.iter().map(|im| im.label.unwrap_or(NO_LABEL)).collect();
        w.write_all(&labels)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |offset, message: &str| Error::Parse { offset, message: message.to_string() };
        if bytes.len() < HEADER_LEN {
            return Err(err(bytes.len(), "truncated dataset header"));
        }
        if &bytes[..4] != DATASET_MAGIC {
            return Err(err(0, "bad dataset magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);
        if u32_at(4) != DATASET_VERSION {
            return Err(err(4, "unsupported dataset version"));
        }
        let n = u32_at(8) as usize;
        let (h, w) = (u32_at(12) as usize, u32_at(16) as usize);
        let split = SplitTag::from_code(bytes[20]).ok_or_else(|| err(20, "unknown split tag"))?;
        let stride = (h * w).div_ceil(8);
        let need = HEADER_LEN + n * stride + n;
        if bytes.len() < need {
            return Err(err(bytes.len(), "truncated dataset payload"));
        }
        let labels = &bytes[HEADER_LEN + n * stride..need];
        let mut images = Vec::with_capacity(n);
        for k in 0..n {
            let row = &bytes[HEADER_LEN + k * stride..HEADER_LEN + (k + 1) * stride];
            let bits = (0..h * w).map(|i| (row[i / 8] >> (7 - i % 8)) & 1).collect();
            let mut im = BinaryImage::new(bits, h, w)?;
            if labels[k] != NO_LABEL {
                im.label = Some(labels[k]);
            }
            images.push(im);
        }
        Ok(Self { images, split })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a BinaryImage;
    type IntoIter = std::slice::Iter<'a, BinaryImage>;

    fn into_iter(self) -> Self::IntoIter {
        self.images.iter()
    }
}

const DATASET_MAGIC: &[u8; 4] = b"BIMG";
const DATASET_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;
const NO_LABEL: u8 = 0xff;
