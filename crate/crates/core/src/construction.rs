//! Sampling and storage of the four transform families.
//!
//! Dense kinds are stored row-major with the `1/sqrt(k)` factor already
//! applied to every entry. The graph construction is stored column-major:
//! each column keeps its `s` sorted row indices and one sign per entry; the
//! common magnitude `1/sqrt(s)` is kept once per transform.
//!
//! # Binary format
//!
//! [`Transform::write_to`] emits, all integers little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `b"JLTR"` |
//! | 2     | format version (`1`) |
//! | 1     | kind: 0 Gaussian, 1 Rademacher, 2 Achlioptas, 3 graph |
//! | 1     | reserved, zero |
//! | 8 × 5 | `k`, `d`, `s` (0 for dense kinds), master seed, stream id |
//!
//! followed by the payload: `k·d` `f64` entries row-major for dense kinds, or
//! `d·s` `u32` row indices then `d·s` `i8` signs (column by column) for the
//! graph construction.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, JlError, Result};
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionKind {
    /// Entries i.i.d. `N(0, 1/k)`.
    DenseGaussian,
    /// Entries `±1/sqrt(k)` with equal probability.
    Rademacher,
    /// Entries `sqrt(3/k)·{+1, 0, -1}` with probabilities `1/6, 2/3, 1/6`.
    AchlioptasSparse,
    /// Exactly `s` entries `±1/sqrt(s)` per column, rows chosen without replacement.
    GraphSparse { s: usize },
}

impl ConstructionKind {
    pub fn is_dense(self) -> bool {
        !matches!(self, ConstructionKind::GraphSparse { .. })
    }

    fn code(self) -> u8 {
        match self {
            ConstructionKind::DenseGaussian => 0,
            ConstructionKind::Rademacher => 1,
            ConstructionKind::AchlioptasSparse => 2,
            ConstructionKind::GraphSparse { .. } => 3,
        }
    }
}

impl fmt::Display for ConstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionKind::DenseGaussian => write!(f, "gaussian"),
            ConstructionKind::Rademacher => write!(f, "rademacher"),
            ConstructionKind::AchlioptasSparse => write!(f, "achlioptas"),
            ConstructionKind::GraphSparse { s } => write!(f, "graph(s={s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTransform {
    k: usize,
    d: usize,
    kind: ConstructionKind,
    entries: Vec<f64>,
    seed: SeedSpec,
}

impl DenseTransform {
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn kind(&self) -> ConstructionKind {
        self.kind
    }
    pub fn seed(&self) -> SeedSpec {
        self.seed
    }
    /// Row-major, pre-scaled entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.d..(r + 1) * self.d]
    }
    /// Entries are always stored with the output scaling applied.
    pub fn scale_applied(&self) -> bool {
        true
    }

    /// Hand-built matrix for tests.
    #[cfg(test)]
    pub(crate) fn from_row_major(k: usize, d: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), k * d);
        Self {
            k,
            d,
            kind: ConstructionKind::DenseGaussian,
            entries,
            seed: SeedSpec::root(0),
        }
    }
}

/// Column-major storage for the graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumnLayout {
    k: usize,
    d: usize,
    s: usize,
    /// `d·s` row indices, column `i` at `[i*s, (i+1)*s)`, each run sorted.
    rows: Vec<u32>,
    /// One `±1` per stored entry, aligned with `rows`.
    signs: Vec<i8>,
    scale: f64,
    seed: SeedSpec,
}

impl SparseColumnLayout {
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn seed(&self) -> SeedSpec {
        self.seed
    }
    /// Magnitude of every nonzero entry, `1/sqrt(s)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn column_rows(&self, col: usize) -> &[u32] {
        &self.rows[col * self.s..(col + 1) * self.s]
    }

    pub fn column_signs(&self, col: usize) -> &[i8] {
        &self.signs[col * self.s..(col + 1) * self.s]
    }

    /// Checks every column: exactly `s` strictly increasing rows below `k`,
    /// all signs `±1`. Returns the offending column indices.
    pub fn violations(&self) -> Vec<usize> {
        if self.rows.len() != self.d * self.s || self.signs.len() != self.d * self.s {
            return (0..self.d).collect();
        }
        (0..self.d)
            .filter(|&c| {
                let rows = self.column_rows(c);
                let signs = self.column_signs(c);
                rows.len() != self.s
                    || rows.iter().any(|&r| r as usize >= self.k)
                    || rows.windows(2).any(|w| w[0] >= w[1])
                    || signs.iter().any(|&g| g != 1 && g != -1)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Dense(DenseTransform),
    Graph(SparseColumnLayout),
}

impl Transform {
    pub fn k(&self) -> usize {
        match self {
            Transform::Dense(t) => t.k,
            Transform::Graph(t) => t.k,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Transform::Dense(t) => t.d,
            Transform::Graph(t) => t.d,
        }
    }

    pub fn kind(&self) -> ConstructionKind {
        match self {
            Transform::Dense(t) => t.kind,
            Transform::Graph(t) => ConstructionKind::GraphSparse { s: t.s },
        }
    }

    pub fn seed(&self) -> SeedSpec {
        match self {
            Transform::Dense(t) => t.seed,
            Transform::Graph(t) => t.seed,
        }
    }

    pub fn as_graph(&self) -> Option<&SparseColumnLayout> {
        match self {
            Transform::Graph(t) => Some(t),
            Transform::Dense(_) => None,
        }
    }

    pub fn as_dense(&self) -> Option<&DenseTransform> {
        match self {
            Transform::Dense(t) => Some(t),
            Transform::Graph(_) => None,
        }
    }

    /// Count of structurally nonzero entries.
    pub fn nnz(&self) -> usize {
        match self {
            Transform::Dense(t) => t.entries.iter().filter(|&&v| v != 0.0).count(),
            Transform::Graph(t) => t.s * t.d,
        }
    }

    /// Value at row `r`, column `c`.
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        match self {
            Transform::Dense(t) => t.entries[r * t.d + c],
            Transform::Graph(t) => {
                let rows = t.column_rows(c);
                match rows.binary_search(&(r as u32)) {
                    Ok(pos) => f64::from(t.column_signs(c)[pos]) * t.scale,
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Full row-major matrix, for inspection and testing.
    pub fn to_row_major(&self) -> Vec<f64> {
        match self {
            Transform::Dense(t) => t.entries.clone(),
            Transform::Graph(t) => {
                let mut out = vec![0.0; t.k * t.d];
                for c in 0..t.d {
                    for (&r, &g) in t.column_rows(c).iter().zip(t.column_signs(c)) {
                        out[r as usize * t.d + c] = f64::from(g) * t.scale;
                    }
                }
                out
            }
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let s = match self {
            Transform::Graph(t) => t.s,
            Transform::Dense(_) => 0,
        };
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&[self.kind().code(), 0])?;
        for field in [
            self.k() as u64,
            self.d() as u64,
            s as u64,
            self.seed().master_seed,
            self.seed().stream_id,
        ] {
            w.write_all(&field.to_le_bytes())?;
        }
        match self {
            Transform::Dense(t) => {
                for v in &t.entries {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
            Transform::Graph(t) => {
                for r in &t.rows {
                    w.write_all(&r.to_le_bytes())?;
                }
                let signs: Vec<u8> = t.signs.iter().map(|&g| g as u8).collect();
                w.write_all(&signs)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(JlError::Format("bad magic".into()));
        }
        let mut buf2 = [0u8; 2];
        r.read_exact(&mut buf2)?;
        let version = u16::from_le_bytes(buf2);
        if version != FORMAT_VERSION {
            return Err(JlError::Format(format!("unsupported version {version}")));
        }
        r.read_exact(&mut buf2)?;
        let code = buf2[0];
        let mut read_u64 = || -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        let k = read_u64()? as usize;
        let d = read_u64()? as usize;
        let s = read_u64()? as usize;
        let seed = SeedSpec::new(read_u64()?, read_u64()?);
        let kind = match code {
            0 => ConstructionKind::DenseGaussian,
            1 => ConstructionKind::Rademacher,
            2 => ConstructionKind::AchlioptasSparse,
            3 => ConstructionKind::GraphSparse { s },
            other => return Err(JlError::Format(format!("unknown kind code {other}"))),
        };
        check_shape(kind, k, d)?;
        if kind.is_dense() {
            let len = entry_count(k, d)?;
            let mut entries = Vec::with_capacity(len);
            let mut b = [0u8; 8];
            for _ in 0..len {
                r.read_exact(&mut b)?;
                entries.push(f64::from_le_bytes(b));
            }
            Ok(Transform::Dense(DenseTransform {
                k,
                d,
                kind,
                entries,
                seed,
            }))
        } else {
            let len = entry_count(s, d)?;
            let mut rows = Vec::with_capacity(len);
            let mut b = [0u8; 4];
            for _ in 0..len {
                r.read_exact(&mut b)?;
                rows.push(u32::from_le_bytes(b));
            }
            let mut raw = vec![0u8; len];
            r.read_exact(&mut raw)?;
            let layout = SparseColumnLayout {
                k,
                d,
                s,
                rows,
                signs: raw.into_iter().map(|b| b as i8).collect(),
                scale: 1.0 / (s as f64).sqrt(),
                seed,
            };
            if !layout.violations().is_empty() {
                return Err(JlError::Format("column layout invariants violated".into()));
            }
            Ok(Transform::Graph(layout))
        }
    }
}

const MAGIC: &[u8; 4] = b"JLTR";
const FORMAT_VERSION: u16 = 1;

fn check_shape(kind: ConstructionKind, k: usize, d: usize) -> Result<()> {
    if k == 0 || d == 0 {
        return invalid(format!("k={k} and d={d} must both be at least 1"));
    }
    if let ConstructionKind::GraphSparse { s } = kind {
        if s == 0 || s > k {
            return invalid(format!(
                "column sparsity s={s} must satisfy 1 <= s <= k={k}"
            ));
        }
        if k > u32::MAX as usize {
            return Err(JlError::Resource(format!("k={k} exceeds u32 row indices")));
        }
    }
    Ok(())
}

fn entry_count(rows: usize, cols: usize) -> Result<usize> {
    rows.checked_mul(cols)
        .filter(|&n| n <= isize::MAX as usize / std::mem::size_of::<f64>())
        .ok_or_else(|| JlError::Resource(format!("{rows}x{cols} entries overflow memory")))
}

fn alloc<T>(len: usize) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|e| JlError::Resource(format!("cannot allocate {len} entries: {e}")))?;
    Ok(v)
}

/// Partial Fisher–Yates over a persistent permutation of `[0, k)`.
///
/// After each draw the swaps are undone in reverse order, so the buffer is the
/// identity permutation again and a draw costs `O(s)` rather than `O(k)`.
pub struct RowSampler {
    perm: Vec<u32>,
    swaps: Vec<u32>,
}

impl RowSampler {
    pub fn new(k: usize) -> Self {
        Self {
            perm: (0..k as u32).collect(),
            swaps: Vec::new(),
        }
    }

    /// Writes `s` distinct sorted rows into `out`. Requires `s <= k`.
    pub fn sample_into<R: Rng + ?Sized>(&mut self, s: usize, rng: &mut R, out: &mut Vec<u32>) {
        let k = self.perm.len();
        debug_assert!(s <= k);
        self.swaps.clear();
        for i in 0..s {
            let j = rng.random_range(i..k);
            self.perm.swap(i, j);
            self.swaps.push(j as u32);
        }
        let start = out.len();
        out.extend_from_slice(&self.perm[..s]);
        out[start..].sort_unstable();
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.perm.swap(i, j as usize);
        }
    }
}

/// `s` distinct rows of `[0, k)`, uniform over all `C(k, s)` subsets, sorted.
pub fn sample_rows_without_replacement<R: Rng + ?Sized>(
    k: usize,
    s: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if s > k {
        return invalid(format!("cannot draw s={s} distinct rows from k={k}"));
    }
    let mut out = Vec::with_capacity(s);
    RowSampler::new(k).sample_into(s, rng, &mut out);
    Ok(out.into_iter().map(|r| r as usize).collect())
}

/// Sample a `k × d` transform of the given kind from `seed`.
pub fn sample_transform(
    kind: ConstructionKind,
    k: usize,
    d: usize,
    seed: SeedSpec,
) -> Result<Transform> {
    check_shape(kind, k, d)?;
    let mut rng = seed.stream();
    match kind {
        ConstructionKind::GraphSparse { s } => {
            let len = entry_count(s, d)?;
            let mut rows = alloc::<u32>(len)?;
            let mut signs = alloc::<i8>(len)?;
            let mut sampler = RowSampler::new(k);
            for _ in 0..d {
                sampler.sample_into(s, &mut rng, &mut rows);
                signs.extend((0..s).map(|_| if rng.random::<bool>() { 1i8 } else { -1 }));
            }
            Ok(Transform::Graph(SparseColumnLayout {
                k,
                d,
                s,
                rows,
                signs,
                scale: 1.0 / (s as f64).sqrt(),
                seed,
            }))
        }
        dense_kind => {
            let len = entry_count(k, d)?;
            let mut entries = alloc::<f64>(len)?;
            let inv_sqrt_k = 1.0 / (k as f64).sqrt();
            match dense_kind {
                ConstructionKind::DenseGaussian => entries
                    .extend((0..len).map(|_| rng.sample::<f64, _>(StandardNormal) * inv_sqrt_k)),
                ConstructionKind::Rademacher => entries.extend((0..len).map(|_| {
                    if rng.random::<bool>() {
                        inv_sqrt_k
                    } else {
                        -inv_sqrt_k
                    }
                })),
                ConstructionKind::AchlioptasSparse => {
                    let mag = (3.0 / k as f64).sqrt();
                    entries.extend((0..len).map(|_| match rng.random_range(0u32..6) {
                        0 => mag,
                        1 => -mag,
                        _ => 0.0,
                    }))
                }
                ConstructionKind::GraphSparse { .. } => unreachable!(),
            }
            Ok(Transform::Dense(DenseTransform {
                k,
                d,
                kind: dense_kind,
                entries,
                seed,
            }))
        }
    }
}
