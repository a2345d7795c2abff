#![allow(dead_code)]

use datawave::{BinaryImage, Dataset, Mps, SplitTag};
use rand::Rng;

/// Amplitude by explicit left-to-right matrix products, no helpers from the
/// library.
pub fn brute_amplitude(mps: &Mps<f64>, bits: &[u8]) -> f64 {
    let mut v = vec![1.0];
    for (site, &b) in mps.sites().iter().zip(bits) {
        let mut next = vec![0.0; site.right()];
        for (a, va) in v.iter().enumerate() {
            for (c, out) in next.iter_mut().enumerate() {
                *out += va * site.get(a, b as usize, c);
            }
        }
        v = next;
    }
    v[0]
}

/// Bits of basis index `idx`, site 0 as the most significant bit.
pub fn bits_of(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((idx >> (n - 1 - i)) & 1) as u8).collect()
}

pub fn dense(mps: &Mps<f64>) -> Vec<f64> {
    let n = mps.n_sites();
    (0..1usize << n).map(|i| brute_amplitude(mps, &bits_of(i, n))).collect()
}

/// Schmidt values of the dense state across cut `k` (`k` left sites).
pub fn dense_schmidt(state: &[f64], n: usize, k: usize) -> Vec<f64> {
    let rows = 1usize << k;
    let cols = 1usize << (n - k);
    let m = nalgebra::DMatrix::from_fn(rows, cols, |r, c| state[r * cols + c]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn entropy(s: &[f64]) -> f64 {
    s.iter().map(|x| x * x).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

pub fn dataset(rows: Vec<Vec<u8>>, tag: SplitTag) -> Dataset {
    Dataset::new(rows.into_iter().map(|r| BinaryImage::from_bits(r).unwrap()).collect(), tag).unwrap()
}

/// 4x4 bars (label 0) or stripes (label 1) with independent bit flips.
/// The all-white and all-black patterns are excluded since both classes
/// contain them.
pub fn bars_and_stripes(count: usize, flip: f64, rng: &mut impl Rng) -> Vec<BinaryImage> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let label = rng.random_range(0..2u8);
        let mask: u8 = rng.random_range(1..15);
        let mut bits = vec![0u8; 16];
        for r in 0..4 {
            for c in 0..4 {
                let line = if label == 0 { c } else { r };
                let mut b = (mask >> line) & 1;
                if rng.random::<f64>() < flip {
                    b ^= 1;
                }
                bits[r * 4 + c] = b;
            }
        }
        out.push(BinaryImage::new(bits, 4, 4).unwrap().with_label(label));
    }
    out
}

/// Chi-square statistic and degrees of freedom of observed counts against
/// expected probabilities, pooling outcomes with expected count below 5.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut o, mut e) = (0.0, 0.0);
    for i in order {
        o += counts[i] as f64;
        e += probs[i] * total as f64;
        if e >= 5.0 {
            stat += (o - e) * (o - e) / e;
            bins += 1;
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 {
        stat += (o - e) * (o - e) / e;
        bins += 1;
    }
    (stat, bins - 1)
}

pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let (stat, dof) = chi_square(counts, probs);
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat)
}
