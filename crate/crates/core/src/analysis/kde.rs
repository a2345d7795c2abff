use crate::error::{Error, Result};

/// Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    points: Vec<f64>,
    bandwidth: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule `0.9 min(sigma, IQR / 1.34) n^(-1/5)`, or `None` for data
/// without spread.
pub fn silverman_bandwidth(points: &[f64]) -> Option<f64> {
    let n = points.len() as f64;
    let mean = points.iter().sum::<f64>() / n;
    let sigma = (points.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match iqr / 1.34 {
        r if r > 0.0 => sigma.min(r),
        _ => sigma,
    };
    (spread > 0.0 && spread.is_finite()).then(|| 0.9 * spread * n.powf(-0.2))
}

impl Kde {
    /// Needs at least two points. Without an explicit bandwidth, Silverman's
    /// rule is used; data with zero spread falls back to
    /// `1e-6 * max(1, |mean|)` and logs a warning.
    pub fn new(points: Vec<f64>, bandwidth: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!("KDE needs at least 2 points, got {}", points.len())));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite KDE point {bad}")));
        }
        let bandwidth = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {h}"))),
            None => silverman_bandwidth(&points).unwrap_or_else(|| {
                let mean = points.iter().sum::<f64>() / points.len() as f64;
                let h = 1e-6 * mean.abs().max(1.0);
                log::warn!("KDE input has zero spread; using fallback bandwidth {h:e}");
                h
            }),
        };
        Ok(Self { points, bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / (self.points.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
        norm * self.points.iter().map(|p| (-0.5 * ((x - p) / h).powi(2)).exp()).sum::<f64>()
    }

    /// `(x, density)` at `n` evenly spaced points spanning the data plus
    /// `pad` bandwidths on each side.
    pub fn grid(&self, n: usize, pad: f64) -> Vec<(f64, f64)> {
        let lo = self.points.iter().copied().fold(f64::INFINITY, f64::min) - pad * self.bandwidth;
        let hi = self.points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad * self.bandwidth;
        let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        (0..n).map(|i| lo + step * i as f64).map(|x| (x, self.density(x))).collect()
    }
}
