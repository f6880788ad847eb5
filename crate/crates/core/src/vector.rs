//! Unit input vectors and their generators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng::SeedSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    /// Strictly increasing indices, one value each.
    Sparse {
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    dim: usize,
    storage: Storage,
}

impl InputVector {
    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("vector dimension must be positive");
        }
        Ok(Self {
            dim: values.len(),
            storage: Storage::Dense(values),
        })
    }

    /// Build a sparse vector from `(index, value)` pairs. Indices must be
    /// strictly increasing and below `dim`.
    pub fn sparse(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        if dim == 0 {
            return invalid("vector dimension must be positive");
        }
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (idx, val) in entries {
            if idx >= dim {
                return invalid(format!("index {idx} out of range for dimension {dim}"));
            }
            if let Some(&prev) = indices.last() {
                if idx <= prev {
                    return invalid(format!(
                        "sparse indices must be strictly increasing ({prev} then {idx})"
                    ));
                }
            }
            indices.push(idx);
            values.push(val);
        }
        Ok(Self {
            dim,
            storage: Storage::Sparse { indices, values },
        })
    }

    /// The standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        Self::sparse(dim, vec![(index, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Number of stored entries (`dim` for dense storage).
    pub fn stored_len(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Sparse { indices, .. } => indices.len(),
        }
    }

    /// Stored `(index, value)` pairs in increasing index order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.storage {
            Storage::Dense(v) => Box::new(v.iter().copied().enumerate()),
            Storage::Sparse { indices, values } => {
                Box::new(indices.iter().copied().zip(values.iter().copied()))
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse { indices, values } => {
                let mut out = vec![0.0; self.dim];
                for (&i, &v) in indices.iter().zip(values) {
                    out[i] = v;
                }
                out
            }
        }
    }

    pub fn densified(&self) -> Self {
        Self {
            dim: self.dim,
            storage: Storage::Dense(self.to_dense()),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|x| c * x).collect()),
            Storage::Sparse { indices, values } => Storage::Sparse {
                indices: indices.clone(),
                values: values.iter().map(|x| c * x).collect(),
            },
        };
        Self {
            dim: self.dim,
            storage,
        }
    }
}

/// Normalize in place; the vector must not be all zeros.
fn normalize(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in values.iter_mut() {
        *v /= norm;
    }
}

/// Draw i.i.d. standard normals (ziggurat, `rand_distr::StandardNormal`)
/// until the draw is not all zeros, which for `len >= 1` happens with
/// probability one on the first attempt.
fn nonzero_gaussian<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        if v.iter().any(|&x| x != 0.0) {
            return v;
        }
    }
}

/// Uniform point on the unit sphere in `d` dimensions: standard normal
/// coordinates, normalized.
pub fn sample_unit_sphere(d: usize, seed: SeedSpec) -> Result<InputVector> {
    if d == 0 {
        return invalid("dimension d must be at least 1");
    }
    let mut rng = seed.stream();
    let mut values = nonzero_gaussian(&mut rng, d);
    normalize(&mut values);
    InputVector::dense(values)
}

/// Unit vector with exactly `t` nonzeros. Support is uniform without
/// replacement over `[0, d)`; values are standard normal, then normalized.
pub fn sample_sparse_unit(d: usize, t: usize, seed: SeedSpec) -> Result<InputVector> {
    if d == 0 {
        return invalid("dimension d must be at least 1");
    }
    if t == 0 || t > d {
        return invalid(format!("input sparsity t={t} must satisfy 1 <= t <= d={d}"));
    }
    let mut rng = seed.stream();
    let mut indices = rand::seq::index::sample(&mut rng, d, t).into_vec();
    indices.sort_unstable();
    let mut values = nonzero_gaussian(&mut rng, t);
    normalize(&mut values);
    InputVector::sparse(d, indices.into_iter().zip(values).collect())
}
