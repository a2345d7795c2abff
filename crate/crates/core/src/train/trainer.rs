use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{accumulate_inverse_amplitudes, finish_gradient};
use super::merged::MergedTensor;
use super::split::{split_truncate, CenterSide};
use super::tsgo::tsgo_step;
use crate::analysis::{e0, page_curve};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mps::{normalize_in_place, Mps};
use crate::Scalar;

/// Samples per work unit in the gradient reduction. Partial sums are added in
/// chunk order, so results do not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchSize {
    Full,
    /// A fresh seeded subset of this many samples for every bond update.
    Mini(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub bond_cap: usize,
    /// TSGO rotation angle in radians.
    pub eta: f64,
    pub max_epochs: usize,
    pub batch_size: BatchSize,
    pub seed: u64,
    pub early_stop: bool,
    /// Epochs without improvement of the monitored quality before stopping.
    pub patience: usize,
    pub svd_cutoff: f64,
    /// Cut range for the plateau entropy recorded each epoch; `None` skips it.
    pub plateau: Option<(usize, usize)>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            bond_cap: 100,
            eta: std::f64::consts::PI / 36.0,
            max_epochs: 10,
            batch_size: BatchSize::Full,
            seed: 0,
            early_stop: false,
            patience: 2,
            svd_cutoff: 1e-12,
            plateau: Some((200, 600)),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.bond_cap < 2 {
            return bad(format!("bond cap must be at least 2, got {}", self.bond_cap));
        }
        if !(self.eta > 0.0 && self.eta < std::f64::consts::FRAC_PI_2) {
            return bad(format!("eta must lie in (0, pi/2), got {}", self.eta));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive".into());
        }
        if self.batch_size == BatchSize::Mini(0) {
            return bad("mini-batch size must be positive".into());
        }
        if !(self.svd_cutoff >= 0.0 && self.svd_cutoff.is_finite()) {
            return bad(format!("svd cutoff must be a finite non-negative number, got {}", self.svd_cutoff));
        }
        if let Some((lo, hi)) = self.plateau {
            if lo == 0 || lo > hi {
                return bad(format!("invalid plateau range [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 is the model before any update.
    pub epoch: usize,
    /// Mean energy over the training set, which is the NLL loss.
    pub mean_loss: f64,
    pub e0_train: f64,
    pub class_quality: Option<f64>,
    pub sampling_quality: Option<f64>,
    pub plateau_entropy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    /// Epoch of the returned snapshot.
    pub selected_epoch: usize,
}

impl TrainTrace {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
        let mut s = String::from("epoch,loss,e0,class_quality,sampling_quality,entropy_plateau\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{:.10e},{:.10e},{},{},{}\n",
                r.epoch,
                r.mean_loss,
                r.e0_train,
                opt(r.class_quality),
                opt(r.sampling_quality),
                opt(r.plateau_entropy)
            ));
        }
        s
    }
}

/// Quality signal evaluated after every epoch; larger is better.
pub trait QualityMonitor<T: Scalar> {
    fn quality(&mut self, mps: &Mps<T>) -> Result<f64>;

    fn sampling_quality(&mut self, _mps: &Mps<T>) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// Mean energy and soft-minimum energy of `data` under `mps`.
pub fn energy_summary<T: Scalar>(mps: &Mps<T>, data: &Dataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    let energies = data
        .images()
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let la = mps.log_amplitude(x)?;
            if la.is_zero() {
                return Err(Error::ZeroAmplitude { sample: k });
            }
            Ok(-la.log_prob().widen())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    Ok((mean, e0(&energies)?))
}

/// Per-sample boundary vectors for every site.
///
/// With the active bond at `(i, i + 1)`, slot `j <= i` holds the normalized
/// contraction of sites `0..j` and slot `j > i` that of sites `j + 1..n`.
struct EnvCache<T> {
    slots: Vec<Vec<T>>,
    dims: Vec<usize>,
}

impl<T: Scalar> EnvCache<T> {
    /// Cache for a model centered at site 0.
    fn build(mps: &Mps<T>, data: &Dataset) -> Self {
        let n = mps.n_sites();
        let count = data.len();
        let mut cache = Self { slots: vec![Vec::new(); n], dims: vec![0; n] };
        cache.reset(0, count);
        cache.reset(n - 1, count);
        for j in (2..n).rev() {
            cache.push_right(mps, data, j);
        }
        cache
    }

    fn reset(&mut self, j: usize, count: usize) {
        self.dims[j] = 1;
        self.slots[j] = vec![T::one(); count];
    }

    /// Slot `j - 1` becomes the right boundary of site `j - 1` from slot `j`.
    fn push_right(&mut self, mps: &Mps<T>, data: &Dataset, j: usize) {
        let site = mps.site(j);
        let (din, dout) = (site.right(), site.left());
        debug_assert_eq!(self.dims[j], din);
        let mut out = vec![T::zero(); data.len() * dout];
        let src = &self.slots[j];
        out.par_chunks_mut(dout).zip(data.images().par_iter()).enumerate().for_each(|(k, (o, x))| {
            site.apply_right(&src[k * din..(k + 1) * din], x.bits()[j] as usize, o);
            normalize_in_place(o);
        });
        self.slots[j - 1] = out;
        self.dims[j - 1] = dout;
    }

    /// Slot `j + 1` becomes the left boundary of site `j + 1` from slot `j`.
    fn push_left(&mut self, mps: &Mps<T>, data: &Dataset, j: usize) {
        let site = mps.site(j);
        let (din, dout) = (site.left(), site.right());
        debug_assert_eq!(self.dims[j], din);
        let mut out = vec![T::zero(); data.len() * dout];
        let src = &self.slots[j];
        out.par_chunks_mut(dout).zip(data.images().par_iter()).enumerate().for_each(|(k, (o, x))| {
            site.apply_left(&src[k * din..(k + 1) * din], x.bits()[j] as usize, o);
            normalize_in_place(o);
        });
        self.slots[j + 1] = out;
        self.dims[j + 1] = dout;
    }
}

/// Two-site sweeping optimizer bound to one training set.
pub struct Trainer<'a, T: Scalar> {
    mps: Mps<T>,
    data: &'a Dataset,
    config: TrainConfig,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl<'a, T: Scalar> Trainer<'a, T> {
    pub fn new(mps: Mps<T>, data: &'a Dataset, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        if data.n_sites() != Some(mps.n_sites()) {
            return Err(Error::LengthMismatch { expected: mps.n_sites(), got: data.n_sites().unwrap_or(0) });
        }
        if mps.n_sites() < 2 {
            return Err(Error::InvalidArgument("two-site training needs at least two sites".into()));
        }
        let mut mps = mps.with_bond_cap(config.bond_cap.max(1))?;
        match mps.ortho_center() {
            Some(_) => mps.move_center(0)?,
            None => mps.canonicalize(0)?,
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self { mps, data, config, rng, epoch: 0 })
    }

    pub fn model(&self) -> &Mps<T> {
        &self.mps
    }

    pub fn into_model(self) -> Mps<T> {
        self.mps
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// One left-to-right and one right-to-left sweep.
    pub fn run_epoch(&mut self) -> Result<()> {
        let n = self.mps.n_sites();
        let mut cache = EnvCache::build(&self.mps, self.data);
        for i in 0..n - 1 {
            self.update_bond(&cache, i, CenterSide::Right)?;
            if i + 1 < n - 1 {
                cache.push_left(&self.mps, self.data, i);
            }
        }
        cache.reset(n - 1, self.data.len());
        for i in (0..n - 1).rev() {
            self.update_bond(&cache, i, CenterSide::Left)?;
            if i > 0 {
                cache.push_right(&self.mps, self.data, i + 1);
            }
        }
        self.epoch += 1;
        Ok(())
    }

    fn batch_indices(&mut self) -> Option<Vec<usize>> {
        match self.config.batch_size {
            BatchSize::Mini(b) if b < self.data.len() => {
                let mut idx = rand::seq::index::sample(&mut self.rng, self.data.len(), b).into_vec();
                idx.sort_unstable();
                Some(idx)
            }
            _ => None,
        }
    }

    fn update_bond(&mut self, cache: &EnvCache<T>, i: usize, side: CenterSide) -> Result<()> {
        let merged = MergedTensor::from_mps(&self.mps, i)?;
        let (l, r) = (merged.left, merged.right);
        let (left, right) = (&cache.slots[i], &cache.slots[i + 1]);
        debug_assert_eq!((cache.dims[i], cache.dims[i + 1]), (l, r));
        let indices = self.batch_indices();
        let count = indices.as_ref().map_or(self.data.len(), Vec::len);
        let images = self.data.images();
        let pick = |p: usize| indices.as_ref().map_or(p, |v| v[p]);
        let partials = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![T::zero(); merged.data.len()];
                let samples = (c * CHUNK..((c + 1) * CHUNK).min(count)).map(|p| {
                    let k = pick(p);
                    let bits = images[k].bits();
                    (k, bits[i] as usize, bits[i + 1] as usize, k)
                });
                accumulate_inverse_amplitudes(&merged, left, right, samples, &mut acc)?;
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut grad = vec![T::zero(); merged.data.len()];
        for p in partials {
            grad.iter_mut().zip(p).for_each(|(g, v)| *g += v);
        }
        finish_gradient(&merged, &mut grad, count);

        let rotated = tsgo_step(&merged.data, &grad, T::of(self.config.eta))?;
        let out = split_truncate(
            &MergedTensor::new(l, r, rotated)?,
            side,
            self.config.bond_cap,
            T::of(self.config.svd_cutoff),
        )?;
        let sites = self.mps.sites_mut();
        sites[i] = out.left;
        sites[i + 1] = out.right;
        self.mps.set_center(Some(match side {
            CenterSide::Left => i,
            CenterSide::Right => i + 1,
        }));
        Ok(())
    }

    /// Loss, E0 and plateau entropy of the current model.
    pub fn record(&self) -> Result<EpochRecord> {
        self.record_with(&mut None)
    }

    fn record_with(&self, monitor: &mut Option<&mut dyn QualityMonitor<T>>) -> Result<EpochRecord> {
        let (mean_loss, e0_train) = energy_summary(&self.mps, self.data)?;
        let (class_quality, sampling_quality) = match monitor {
            Some(m) => (Some(m.quality(&self.mps)?), m.sampling_quality(&self.mps)?),
            None => (None, None),
        };
        let plateau_entropy = match self.config.plateau {
            Some(range) => Some(page_curve(&self.mps, range)?.s_bar),
            None => None,
        };
        Ok(EpochRecord { epoch: self.epoch, mean_loss, e0_train, class_quality, sampling_quality, plateau_entropy })
    }
}

/// Train `model` on `data`.
///
/// Every epoch is one sweep pair. With `config.early_stop` and a monitor, the
/// snapshot of highest monitored quality is returned (earliest on ties) and
/// training stops once `patience` epochs pass without improvement; otherwise
/// the final model is returned.
pub fn train<T: Scalar>(
    model: Mps<T>,
    data: &Dataset,
    config: &TrainConfig,
    mut monitor: Option<&mut dyn QualityMonitor<T>>,
) -> Result<(Mps<T>, TrainTrace)> {
    let mut trainer = Trainer::new(model, data, config.clone())?;
    let mut trace = TrainTrace::default();
    let first = trainer.record_with(&mut monitor)?;
    let early = config.early_stop && monitor.is_some();
    let mut best = (first.class_quality.unwrap_or(f64::NEG_INFINITY), 0, trainer.model().clone());
    trace.records.push(first);
    while trainer.epoch() < config.max_epochs {
        trainer.run_epoch()?;
        let rec = trainer.record_with(&mut monitor)?;
        log::info!(
            "epoch {} loss {:.4} e0 {:.4} quality {:?}",
            rec.epoch,
            rec.mean_loss,
            rec.e0_train,
            rec.class_quality
        );
        let q = rec.class_quality.unwrap_or(f64::NEG_INFINITY);
        trace.records.push(rec);
        if early {
            if q > best.0 {
                best = (q, trainer.epoch(), trainer.model().clone());
            } else if trainer.epoch() - best.1 > config.patience {
                break;
            }
        }
    }
    if early {
        trace.selected_epoch = best.1;
        Ok((best.2, trace))
    } else {
        trace.selected_epoch = trainer.epoch();
        Ok((trainer.into_model(), trace))
    }
}
