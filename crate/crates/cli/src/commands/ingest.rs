use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use datawave::data::idx::{attach_labels, maybe_gunzip, parse_idx_images, parse_idx_labels};
use datawave::{Dataset, SplitTag};
use serde::Serialize;

use super::{dataset_bytes, labels_of};
use crate::args::{IngestArgs, SetName};
use crate::error::{CliError, CliResult};
use crate::run::{Invocation, Run};

/// Locates `<prefix>-<kind>` under `dir`, gzipped or not.
pub fn idx_file(dir: &Path, prefix: &str, kind: &str) -> CliResult<PathBuf> {
    let stems = [format!("{prefix}-{kind}-ubyte"), format!("{prefix}-{}", kind.replacen('-', ".", 1) + "-ubyte")];
    for stem in &stems {
        for ext in ["", ".gz"] {
            let p = dir.join(format!("{stem}{ext}"));
            if p.is_file() {
                return Ok(p);
            }
        }
    }
    Err(CliError::Usage(format!("no {prefix}-{kind}-ubyte[.gz] under {}", dir.display())))
}

/// Reads and binarizes an MNIST split found in `dir`.
pub fn read_mnist(run: &mut Run, dir: &Path, set: SetName, threshold: u8) -> CliResult<Dataset> {
    let prefix = match set {
        SetName::Train => "train",
        SetName::Test => "t10k",
    };
    let images = idx_file(dir, prefix, "images-idx3")?;
    let labels = idx_file(dir, prefix, "labels-idx1")?;
    read_pair(run, &images, &labels, set, threshold)
}

fn read_pair(run: &mut Run, images: &Path, labels: &Path, set: SetName, threshold: u8) -> CliResult<Dataset> {
    let img = run.read_input("images", images)?;
    let lbl = run.read_input("labels", labels)?;
    let gray = attach_labels(parse_idx_images(&maybe_gunzip(&img)?)?, &parse_idx_labels(&maybe_gunzip(&lbl)?)?)?;
    let tag = match set {
        SetName::Train => SplitTag::Train,
        SetName::Test => SplitTag::Test,
    };
    Ok(Dataset::from_gray(&gray, threshold, tag)?)
}

#[derive(Serialize)]
struct LabelSummary {
    images: usize,
    mean_black_pixels: f64,
}

#[derive(Serialize)]
struct IngestSummary {
    set: SetName,
    threshold: u8,
    height: usize,
    width: usize,
    files: BTreeMap<String, usize>,
    labels: BTreeMap<u8, LabelSummary>,
}

pub fn run(a: &IngestArgs, inv: &Invocation) -> CliResult<()> {
    let mut run = Run::start(inv, "ingest", a, &a.out.out)?;
    run.seed("split", a.seed);
    let mut set = match (&a.images, &a.labels) {
        (Some(i), Some(l)) => read_pair(&mut run, i, l, a.set, a.threshold)?,
        (None, None) => read_mnist(&mut run, &a.data_dir, a.set, a.threshold)?,
        _ => return Err(CliError::Usage("--images and --labels go together".into())),
    };
    run.mark("read");
    if let Some(digits) = &a.digits {
        set = set.filter(|im| im.label.is_some_and(|l| digits.contains(&l)));
    }
    if let Some(k) = a.per_digit {
        let mut seen: BTreeMap<Option<u8>, usize> = BTreeMap::new();
        let keep: Vec<_> = set
            .iter()
            .filter(|im| {
                let c = seen.entry(im.label).or_default();
                *c += 1;
                *c <= k
            })
            .cloned()
            .collect();
        set = Dataset::new(keep, set.split)?;
    }
    if set.is_empty() {
        return Err(CliError::Usage("no images left after filtering".into()));
    }
    let (height, width) = set.shape().unwrap_or((0, 0));
    let name = match a.set {
        SetName::Train => "train.bin",
        SetName::Test => "test.bin",
    };
    let mut parts = vec![(name, set)];
    if a.split_fraction > 0.0 {
        let (keep, held) = parts.remove(0).1.split(1.0 - a.split_fraction, a.seed)?;
        parts = vec![(name, keep), ("validation.bin", held)];
    }
    let mut files = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (file, part) in &parts {
        run.write("dataset", file, &dataset_bytes(part)?)?;
        files.insert(file.to_string(), part.len());
    }
    let main = &parts[0].1;
    for l in labels_of(main) {
        let sub = main.with_label(l);
        labels.insert(l, LabelSummary { images: sub.len(), mean_black_pixels: sub.mean_black_pixels() });
    }
    let summary = IngestSummary { set: a.set, threshold: a.threshold, height, width, files, labels };
    run.write_json("report", "summary.json", &summary)?;
    run.mark("write");
    run.finish()?;
    Ok(())
}
