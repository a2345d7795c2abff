//! IDX container reader and writer (the MNIST distribution format).
//!
//! Layout: a big-endian `u32` magic (`0x00000803` for rank-3 `u8` image
//! tensors, `0x00000801` for rank-1 `u8` label vectors), one big-endian `u32`
//! per dimension, then the payload. Gzip-compressed streams are detected by
//! their two-byte signature and inflated transparently.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::image::GrayImage;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

/// Inflate gzip input, pass anything else through.
pub fn maybe_gunzip(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| parse_err(0, format!("gzip stream: {e}")))?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| parse_err(offset, "truncated header"))
}

/// Parse an IDX image file into grayscale images.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>> {
    let bytes = maybe_gunzip(bytes)?;
    let magic = read_u32(&bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(parse_err(0, format!("bad image magic {magic:#010x}")));
    }
    let count = read_u32(&bytes, 4)? as usize;
    let rows = read_u32(&bytes, 8)? as usize;
    let cols = read_u32(&bytes, 12)? as usize;
    let per_image = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err(8, "image dimensions overflow"))?;
    let payload = count
        .checked_mul(per_image)
        .ok_or_else(|| parse_err(4, "image count overflows payload size"))?;
    let body = &bytes[16..];
    if body.len() < payload {
        return Err(parse_err(
            16 + body.len(),
            format!("truncated payload: expected {payload} bytes, found {}", body.len()),
        ));
    }
    if count > 0 && per_image == 0 {
        return Err(parse_err(8, "zero-sized images"));
    }
    Ok(body[..payload]
        .chunks_exact(per_image.max(1))
        .take(count)
        .map(|px| GrayImage { pixels: px.to_vec(), height: rows, width: cols, label: None })
        .collect())
}

/// Parse an IDX label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let bytes = maybe_gunzip(bytes)?;
    let magic = read_u32(&bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(parse_err(0, format!("bad label magic {magic:#010x}")));
    }
    let count = read_u32(&bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(parse_err(
            8 + body.len(),
            format!("truncated payload: expected {count} labels, found {}", body.len()),
        ));
    }
    Ok(body[..count].to_vec())
}

/// Attach labels to images; the two files must agree on the item count.
pub fn attach_labels(mut images: Vec<GrayImage>, labels: &[u8]) -> Result<Vec<GrayImage>> {
    if images.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    for (img, &l) in images.iter_mut().zip(labels) {
        img.label = Some(l);
    }
    Ok(images)
}

/// Read an image file and, optionally, its companion label file.
pub fn read_idx(images: &Path, labels: Option<&Path>) -> Result<Vec<GrayImage>> {
    let imgs = parse_idx_images(&std::fs::read(images)?)?;
    match labels {
        Some(p) => attach_labels(imgs, &parse_idx_labels(&std::fs::read(p)?)?),
        None => Ok(imgs),
    }
}

pub fn serialize_idx_images(images: &[GrayImage]) -> Result<Vec<u8>> {
    let (rows, cols) = images.first().map(|i| (i.height, i.width)).unwrap_or((0, 0));
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    for img in images {
        if (img.height, img.width) != (rows, cols) {
            return Err(Error::InvalidArgument("images differ in shape".into()));
        }
        out.extend_from_slice(&img.pixels);
    }
    Ok(out)
}

pub fn serialize_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
