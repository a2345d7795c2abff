use crate::error::{Error, Result};

/// An 8-bit grayscale image as stored in IDX files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub pixels: Vec<u8>,
    pub height: usize,
    pub width: usize,
    pub label: Option<u8>,
}

impl GrayImage {
    pub fn new(pixels: Vec<u8>, height: usize, width: usize) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::InvalidArgument(format!(
                "{} pixels do not fill a {height}x{width} grid",
                pixels.len()
            )));
        }
        Ok(Self { pixels, height, width, label: None })
    }
}

/// A black-and-white image, one bit per pixel in row-major order.
///
/// Bit `1` is a stroke ("black") pixel, bit `0` is background.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    bits: Vec<u8>,
    height: usize,
    width: usize,
    pub label: Option<u8>,
}

impl BinaryImage {
    pub fn new(bits: Vec<u8>, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || bits.len() != height * width {
            return Err(Error::InvalidArgument(format!(
                "{} bits do not fill a {height}x{width} grid",
                bits.len()
            )));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "bit {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self { bits, height, width, label: None })
    }

    /// A single-row image, convenient for chains that are not pictures.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        let n = bits.len();
        Self::new(bits, 1, n)
    }

    pub fn with_label(mut self, label: u8) -> Self {
        self.label = Some(label);
        self
    }

    #[inline]
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Number of stroke pixels.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn packed(&self) -> PackedBits {
        PackedBits::from_bits(&self.bits)
    }

    /// One character per pixel, one line per row.
    pub fn to_text_grid(&self) -> String {
        let mut out = String::with_capacity(self.height * (self.width + 1));
        for row in self.bits.chunks(self.width) {
            out.extend(row.iter().map(|&b| if b == 1 { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

/// Basis-state indices selecting `|0>` or `|1>` at each site of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState(pub Vec<u8>);

/// Map an image to the product basis state; sites follow the raster order.
pub fn encode(image: &BinaryImage) -> BasisState {
    BasisState(image.bits.clone())
}

/// Threshold a grayscale image: intensity `>= threshold` becomes a stroke bit.
pub fn binarize(image: &GrayImage, threshold: u8) -> BinaryImage {
    let bits = image.pixels.iter().map(|&p| u8::from(p >= threshold)).collect();
    BinaryImage { bits, height: image.height, width: image.width, label: image.label }
}

/// Bits packed into 64-bit words for fast Hamming distances.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedBits(Vec<u64>);

impl PackedBits {
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b == 1 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self(words)
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        Self(words)
    }

    pub fn words(&self) -> &[u64] {
        &self.0
    }

    /// Lowercase hex, 16 digits per word, site 0 in the lowest bit of the
    /// first word.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|w| format!("{w:016x}")).collect()
    }

    #[inline]
    pub fn hamming(&self, other: &Self) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a ^ b).count_ones()).sum()
    }
}

/// Number of positions at which two equally long bit strings differ.
pub fn hamming_distance(a: &BinaryImage, b: &BinaryImage) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}
