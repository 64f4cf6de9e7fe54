//! Labeled feature datasets: loading, validation, partitioning and class
//! statistics.
//!
//! A [`Dataset`] is immutable once built. Labels are remapped to dense class
//! ids `0..C` on load; the original label strings are kept in
//! [`Dataset::class_names`] so outputs can be translated back.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const BINARY_MAGIC: &[u8; 5] = b"MSEL1";

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    class_count: usize,
    class_names: Vec<String>,
    standardized: bool,
}

impl Dataset {
    /// Builds a dataset from row-major features, validating every invariant.
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let names = (0..class_count).map(|c| c.to_string()).collect();
        Self::with_class_names(features, dim, labels, class_count, names)
    }

    pub fn with_class_names(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        class_count: usize,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("feature dimension must be at least 1".into()));
        }
        if class_count < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, found {class_count}"
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if class_names.len() != class_count {
            return Err(Error::InvalidDataset("class name table has wrong length".into()));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                column: (pos % dim).to_string(),
            });
        }
        let mut seen = vec![false; class_count];
        for &y in &labels {
            if y >= class_count {
                return Err(Error::InvalidDataset(format!(
                    "label {y} outside [0, {class_count})"
                )));
            }
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyClass(c));
        }
        Ok(Self {
            features,
            dim,
            labels,
            class_count,
            class_names,
            standardized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Dense class id -> original label.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Per-column z-scoring. Constant columns are centered but not scaled.
    pub fn standardize(&self) -> Dataset {
        self.apply_column_stats(self, &self.column_stats())
    }

    /// Re-expresses labels against another dataset's class table, e.g. a
    /// test file whose classes appear in a different order. Classes may be
    /// missing here; an unknown class name is an error.
    pub fn align_classes(&self, names: &[String]) -> Result<Dataset> {
        let map: Vec<usize> = self
            .class_names
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::InvalidDataset(format!("class `{n}` is not in the training data")))
            })
            .collect::<Result<_>>()?;
        Ok(Dataset {
            labels: self.labels.iter().map(|&y| map[y]).collect(),
            class_count: names.len(),
            class_names: names.to_vec(),
            ..self.clone()
        })
    }

    /// Standardizes `other` with this dataset's column statistics.
    pub fn standardize_other(&self, other: &Dataset) -> Result<Dataset> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(self.apply_column_stats(other, &self.column_stats()))
    }

    /// Mean and inverse standard deviation (1 for constant columns) per column.
    fn column_stats(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| {
                let mean = (0..self.len()).map(|i| self.row(i)[j]).sum::<f64>() / n;
                let var = (0..self.len())
                    .map(|i| (self.row(i)[j] - mean).powi(2))
                    .sum::<f64>()
                    / n;
                let sd = var.sqrt();
                (mean, if sd > 0.0 { 1.0 / sd } else { 1.0 })
            })
            .collect()
    }

    fn apply_column_stats(&self, target: &Dataset, stats: &[(f64, f64)]) -> Dataset {
        let mut out = target.clone();
        for (k, v) in out.features.iter_mut().enumerate() {
            let (mean, scale) = stats[k % self.dim];
            *v = (*v - mean) * scale;
        }
        out.standardized = true;
        out
    }

    /// SHA-256 over the dimension header, features (as f64 LE) and labels.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.len() as u64).to_le_bytes());
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.class_count as u64).to_le_bytes());
        for v in &self.features {
            h.update(v.to_le_bytes());
        }
        for &y in &self.labels {
            h.update((y as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Number of samples per class over the whole dataset.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &y in &self.labels {
            sizes[y] += 1;
        }
        sizes
    }

    /// Reads a CSV with a header row. `label_column` names the target; every
    /// other column must be numeric. Labels are remapped densely in order of
    /// first appearance.
    pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, label_column)
    }

    pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_idx = headers
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
        let feature_cols: Vec<(usize, String)> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(i, h)| (i, h.to_string()))
            .collect();
        if feature_cols.is_empty() {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }

        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut class_ids: HashMap<String, usize> = HashMap::new();
        let mut class_names = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (col, name) in &feature_cols {
                let cell = record.get(*col).unwrap_or("");
                let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        row,
                        column: name.clone(),
                    });
                }
                features.push(value);
            }
            let raw_label = record.get(label_idx).unwrap_or("").to_string();
            let next = class_ids.len();
            let id = *class_ids.entry(raw_label.clone()).or_insert_with(|| {
                class_names.push(raw_label);
                next
            });
            labels.push(id);
        }
        let c = class_names.len();
        Dataset::with_class_names(features, feature_cols.len(), labels, c, class_names)
    }

    /// Writes features and dense labels as CSV with columns `f0..f{d-1},label`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let mut header: Vec<String> = (0..self.dim).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.class_names[self.labels[i]].clone());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Binary layout: `MSEL1`, LE u64 n, d, C, n*d f32 features (row-major),
    /// n u32 labels.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.class_count as u64).to_le_bytes())?;
        for &v in &self.features {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        for &y in &self.labels {
            w.write_all(&(y as u32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Dataset> {
        let bad = |msg: &str| Error::BadBinary(msg.to_string());
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != BINARY_MAGIC {
            return Err(bad("missing MSEL1 magic"));
        }
        let mut word = [0u8; 8];
        let mut read_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut word).map_err(|_| bad("truncated header"))?;
            Ok(u64::from_le_bytes(word))
        };
        let n = read_u64(&mut r)? as usize;
        let d = read_u64(&mut r)? as usize;
        let c = read_u64(&mut r)? as usize;
        let total = n.checked_mul(d).ok_or_else(|| bad("size overflow"))?;
        let mut buf = vec![0u8; total.checked_mul(4).ok_or_else(|| bad("size overflow"))?];
        r.read_exact(&mut buf).map_err(|_| bad("truncated feature block"))?;
        let features = buf
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
            .collect();
        let mut buf = vec![0u8; n * 4];
        r.read_exact(&mut buf).map_err(|_| bad("truncated label block"))?;
        let labels = buf
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
            .collect();
        Dataset::new(features, d, labels, c)
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_binary(BufReader::new(file))
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_binary(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Builds a dataset holding only `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            features.extend_from_slice(self.row(i));
        }
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        Dataset::with_class_names(features, self.dim, labels, self.class_count, self.class_names.clone())
    }
}

/// Pool/validation partition of a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub pool_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
    pub seed: u64,
}

/// Raw per-class counts over `subset`.
pub fn class_frequencies(dataset: &Dataset, subset: &[usize]) -> Vec<f64> {
    let mut counts = vec![0.0; dataset.class_count()];
    for &i in subset {
        counts[dataset.label(i)] += 1.0;
    }
    counts
}

/// Splits `count` across groups proportionally to `sizes`.
///
/// Largest remainders get the leftover units, ties going to the lower group
/// id. Afterwards every nonempty group that received nothing takes one unit
/// from a group that was rounded up (largest overshoot first), as long as
/// such a donor exists. Every share stays within one unit of its exact quota.
pub fn largest_remainder(sizes: &[usize], count: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 || count == 0 {
        return vec![0; sizes.len()];
    }
    let count = count.min(total);
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| s * count / total).collect();
    // numerator of the fractional part, over `total`
    let rem: Vec<usize> = sizes.iter().map(|&s| s * count % total).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
    for &g in order.iter().take(count - assigned) {
        alloc[g] += 1;
    }

    let needy: Vec<usize> = (0..sizes.len()).filter(|&g| sizes[g] > 0 && alloc[g] == 0).collect();
    for g in needy {
        // donors: groups rounded up, ranked by overshoot alloc - quota
        let donor = (0..sizes.len())
            .filter(|&h| alloc[h] * total > sizes[h] * count && alloc[h] > 1)
            .max_by(|&a, &b| {
                let oa = alloc[a] * total - sizes[a] * count;
                let ob = alloc[b] * total - sizes[b] * count;
                oa.cmp(&ob).then(b.cmp(&a))
            });
        match donor {
            Some(h) => {
                alloc[h] -= 1;
                alloc[g] += 1;
            }
            None => break,
        }
    }
    alloc
}

fn members_by_class(dataset: &Dataset, from: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = from.to_vec();
    sorted.sort_unstable();
    let mut groups = vec![Vec::new(); dataset.class_count()];
    for i in sorted {
        groups[dataset.label(i)].push(i);
    }
    groups
}

/// Class-proportional random sample of `count` indices from `from`, returned
/// in ascending order.
pub fn stratified_sample(dataset: &Dataset, from: &[usize], count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > from.len() {
        return Err(Error::NotEnoughSamples {
            requested: count,
            available: from.len(),
        });
    }
    let groups = members_by_class(dataset, from);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let alloc = largest_remainder(&sizes, count);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for (mut members, take) in groups.into_iter().zip(alloc) {
        members.shuffle(&mut rng);
        out.extend_from_slice(&members[..take]);
    }
    out.sort_unstable();
    Ok(out)
}

/// Stratified pool/validation split. The validation set holds
/// `round(val_fraction * n)` samples with at least one per class.
pub fn split_pool_val(dataset: &Dataset, val_fraction: f64, seed: u64) -> Result<SplitSpec> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "val_fraction must lie in (0, 1), got {val_fraction}"
        )));
    }
    let n = dataset.len();
    let c = dataset.class_count();
    if val_fraction * (n as f64) < c as f64 {
        return Err(Error::InvalidArgument(format!(
            "val_fraction {val_fraction} of {n} samples cannot cover {c} classes"
        )));
    }
    let sizes = dataset.class_sizes();
    if let Some((class, &size)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
        return Err(Error::ClassTooSmall { class, size });
    }
    let val_total = (val_fraction * n as f64).round() as usize;
    let alloc = largest_remainder(&sizes, val_total);
    if let Some(class) = alloc.iter().zip(&sizes).position(|(&a, &s)| a == 0 || a >= s) {
        return Err(Error::ClassTooSmall {
            class,
            size: sizes[class],
        });
    }

    let all: Vec<usize> = (0..n).collect();
    let groups = members_by_class(dataset, &all);
    let mut rng = rng_from_seed(seed);
    let mut val = Vec::with_capacity(val_total);
    let mut pool = Vec::with_capacity(n - val_total);
    for (mut members, take) in groups.into_iter().zip(alloc) {
        members.shuffle(&mut rng);
        val.extend_from_slice(&members[..take]);
        pool.extend_from_slice(&members[take..]);
    }
    val.sort_unstable();
    pool.sort_unstable();
    Ok(SplitSpec {
        pool_indices: pool,
        val_indices: val,
        seed,
    })
}
