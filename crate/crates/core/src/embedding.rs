//! Feature space used for diversity distances: raw features or a PCA
//! projection fitted on the pool.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Projection dimension used when the caller does not choose one and the
/// raw dimension exceeds it.
pub const DEFAULT_PROJECTION_DIM: usize = 32;

/// Top-`k` principal directions of a centered sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// Row-major `k x d`, rows orthonormal.
    pub basis: Vec<f64>,
    pub k: usize,
    pub dim: usize,
    /// Covariance eigenvalues matching the basis rows, descending.
    pub eigenvalues: Vec<f64>,
}

impl Projection {
    /// Fits on the rows in `idx` using the sample covariance (divisor m - 1).
    pub fn fit(ds: &Dataset, idx: &[usize], k: usize) -> Result<Self> {
        let d = ds.dim();
        let m = idx.len();
        if k == 0 || k > d || k > m {
            return Err(Error::InvalidArgument(format!(
                "projection dimension {k} must lie in [1, min(d={d}, |idx|={m})]"
            )));
        }
        let mut mean = vec![0.0; d];
        for &i in idx {
            for (acc, v) in mean.iter_mut().zip(ds.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);

        let mut cov = DMatrix::<f64>::zeros(d, d);
        for &i in idx {
            let x = ds.row(i);
            for a in 0..d {
                let xa = x[a] - mean[a];
                for b in a..d {
                    cov[(a, b)] += xa * (x[b] - mean[b]);
                }
            }
        }
        let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / denom;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let mut basis = Vec::with_capacity(k * d);
        let mut eigenvalues = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            let v = eig.eigenvectors.column(col);
            // sign convention: largest-magnitude component positive
            let pivot = (0..d).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            basis.extend(v.iter().map(|x| x * sign));
            eigenvalues.push(eig.eigenvalues[col]);
        }
        Ok(Self {
            mean,
            basis,
            k,
            dim: d,
            eigenvalues,
        })
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.project_unchecked(x))
    }

    fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).zip(&self.mean).map(|((b, v), m)| b * (v - m)).sum())
            .collect()
    }

    /// Maps projected coordinates back to the original space.
    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (row, &zk) in self.basis.chunks_exact(self.dim).zip(z) {
            for (xv, b) in x.iter_mut().zip(row) {
                *xv += zk * b;
            }
        }
        x
    }
}

/// Which feature space the diversity score measures distances in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSpace {
    Raw,
    Pca { k: usize },
}

impl EmbeddingSpace {
    /// PCA to `requested` (or the default 32 when the raw dimension exceeds
    /// it); raw features otherwise.
    pub fn choose(dim: usize, requested: Option<usize>) -> Self {
        match requested {
            Some(k) if k < dim => EmbeddingSpace::Pca { k },
            Some(_) => EmbeddingSpace::Raw,
            None if dim > DEFAULT_PROJECTION_DIM => EmbeddingSpace::Pca {
                k: DEFAULT_PROJECTION_DIM,
            },
            None => EmbeddingSpace::Raw,
        }
    }
}

impl std::fmt::Display for EmbeddingSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EmbeddingSpace::Raw => write!(f, "raw"),
            EmbeddingSpace::Pca { k } => write!(f, "pca-{k}"),
        }
    }
}

/// Dense `n x k` matrix of per-sample embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    data: Vec<f64>,
    dim: usize,
    pub space: EmbeddingSpace,
}

impl Embeddings {
    pub fn from_rows(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument("embedding rows have inconsistent length".into()));
        }
        Ok(Self {
            data,
            dim,
            space: EmbeddingSpace::Raw,
        })
    }

    /// Embeds every row of `ds`, fitting a projection on `fit_idx` when the
    /// chosen space is PCA.
    pub fn build(ds: &Dataset, fit_idx: &[usize], space: EmbeddingSpace) -> Result<(Self, Option<Projection>)> {
        match space {
            EmbeddingSpace::Raw => Ok((
                Self {
                    data: ds.features().to_vec(),
                    dim: ds.dim(),
                    space,
                },
                None,
            )),
            EmbeddingSpace::Pca { k } => {
                let p = Projection::fit(ds, fit_idx, k)?;
                let mut data = Vec::with_capacity(ds.len() * k);
                for i in 0..ds.len() {
                    data.extend(p.project_unchecked(ds.row(i)));
                }
                Ok((Self { data, dim: k, space }, Some(p)))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.row(i), self.row(j))
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
