//! Datasets: IDX ingestion, synthetic Gaussian blobs, and shuffled batching.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RandomStream};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Features in `[0, 1]`, one row per sample, with labels below `num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(v) = features.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("feature value {v} is outside [0, 1]")));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Domain(format!(
                "label {l} is out of range for {num_classes} classes"
            )));
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    /// Seeded random split; the first part receives `round(fraction * n)`
    /// samples.
    pub fn split(&self, fraction: f64, rng: &mut RandomStream) -> Result<(Dataset, Dataset)> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Domain(format!(
                "split fraction {fraction} is outside [0, 1]"
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        rng.shuffle(&mut idx);
        let cut = (fraction * self.len() as f64).round() as usize;
        Ok((self.subset(&idx[..cut]), self.subset(&idx[cut..])))
    }
}

fn read_u32_be(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header at byte {offset}")))
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let found = bytes
        .get(..4)
        .ok_or_else(|| Error::Format(format!("{what}: file shorter than the 4-byte magic")))?;
    if found != expected.to_be_bytes() {
        return Err(Error::Format(format!(
            "{what}: bad magic bytes {:02x} {:02x} {:02x} {:02x} (expected {expected:08x})",
            found[0], found[1], found[2], found[3]
        )));
    }
    Ok(())
}

/// Parses an IDX image file (`[n, rows, cols]` unsigned bytes) into an
/// `n x (rows*cols)` matrix scaled by 1/255.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Matrix> {
    check_magic(bytes, IDX_IMAGES_MAGIC, "images")?;
    let n = read_u32_be(bytes, 4, "images")? as usize;
    let rows = read_u32_be(bytes, 8, "images")? as usize;
    let cols = read_u32_be(bytes, 12, "images")? as usize;
    let pixels = &bytes[16..];
    let expected = n * rows * cols;
    if pixels.len() != expected {
        return Err(Error::Format(format!(
            "images: header declares {n}x{rows}x{cols} = {expected} pixels, file holds {}",
            pixels.len()
        )));
    }
    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    Matrix::from_vec(n, rows * cols, data)
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IDX_LABELS_MAGIC, "labels")?;
    let n = read_u32_be(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::Format(format!(
            "labels: header declares {n} labels, file holds {}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

/// Loads an IDX image/label pair. The class count is one more than the
/// largest label present.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let images = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let features = parse_idx_images(&images)?;
    let labels = parse_idx_labels(&labels)?;
    if labels.len() != features.rows() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    let num_classes = labels.iter().max().map_or(0, |&m| usize::from(m) + 1);
    Dataset::new(features, labels.into_iter().map(usize::from).collect(), num_classes)
}

/// Serializes images and labels in IDX layout. Pixels are the raw bytes.
pub fn encode_idx(images: &[u8], n: usize, rows: usize, cols: usize, labels: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
    if images.len() != n * rows * cols || labels.len() != n {
        return Err(Error::Shape(format!(
            "{} pixels and {} labels do not describe {n} images of {rows}x{cols}",
            images.len(),
            labels.len()
        )));
    }
    let mut img = Vec::with_capacity(16 + images.len());
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    for d in [n, rows, cols] {
        img.extend_from_slice(&(d as u32).to_be_bytes());
    }
    img.extend_from_slice(images);

    let mut lab = Vec::with_capacity(8 + labels.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(n as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    Ok((img, lab))
}

pub fn write_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    images: &[u8],
    n: usize,
    rows: usize,
    cols: usize,
    labels: &[u8],
) -> Result<()> {
    let (img, lab) = encode_idx(images, n, rows, cols, labels)?;
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    fs::write(ip, img).map_err(|e| Error::io(ip, e))?;
    fs::write(lp, lab).map_err(|e| Error::io(lp, e))?;
    Ok(())
}

/// Gaussian blobs around `classes` uniform means in `[0,1]^d`, clamped to
/// `[0, 1]`. Sample `i` belongs to class `i % classes`.
pub fn synth_blobs(
    n: usize,
    d: usize,
    classes: usize,
    spread: f64,
    rng: &mut RandomStream,
) -> Result<Dataset> {
    if classes == 0 || n < classes || d == 0 {
        return Err(Error::Domain(format!(
            "blobs need n >= classes >= 1 and d >= 1 (got n={n}, d={d}, classes={classes})"
        )));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Domain(format!("blob spread must be positive, got {spread}")));
    }
    let means = rng.uniform(0.0, 1.0, classes, d)?;
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        for &m in means.row(c) {
            data.push((m + spread * rng.next_gaussian()).clamp(0.0, 1.0));
        }
        labels.push(c);
    }
    Dataset::new(Matrix::from_vec(n, d, data)?, labels, classes)
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub indices: Vec<usize>,
    pub features: Matrix,
    pub labels: Vec<usize>,
}

/// One random permutation cut into contiguous batches; the last batch may be
/// short.
pub fn batches(dataset: &Dataset, batch_size: usize, rng: &mut RandomStream) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Domain("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    rng.shuffle(&mut order);
    Ok(order
        .chunks(batch_size)
        .map(|idx| Batch {
            indices: idx.to_vec(),
            features: dataset.features.select_rows(idx),
            labels: idx.iter().map(|&i| dataset.labels[i]).collect(),
        })
        .collect())
}

/// Dataset description as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs {
        n: usize,
        d: usize,
        classes: usize,
        spread: f64,
        seed: u64,
    },
    Idx {
        images: String,
        labels: String,
    },
}

impl DatasetSpec {
    /// Builds the dataset. Relative IDX paths resolve against `base_dir`.
    pub fn load(&self, base_dir: Option<&Path>) -> Result<Dataset> {
        match self {
            DatasetSpec::Blobs {
                n,
                d,
                classes,
                spread,
                seed,
            } => synth_blobs(*n, *d, *classes, *spread, &mut RandomStream::new(*seed)),
            DatasetSpec::Idx { images, labels } => {
                let resolve = |p: &str| match base_dir {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => Path::new(p).to_path_buf(),
                };
                load_idx(resolve(images), resolve(labels))
            }
        }
    }
}
