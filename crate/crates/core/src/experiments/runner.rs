//! Trial orchestration for the four distortion experiments.
//!
//! Random streams are laid out as
//!
//! ```text
//! vectors:    root / VECTORS    / family / t (0 for sphere) / vector index
//! transforms: root / TRANSFORMS / construction / s (0 unless graph) / k / trial
//! ```
//!
//! so a transform instance depends only on its own coordinates. Input vectors
//! are drawn once per experiment and shared by every construction and trial.
//! Cells run in parallel and are aggregated in index order, which makes the
//! output independent of the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Construction, ExperimentConfig, InputFamily};
use crate::apply::distortion_batch;
use crate::construction::{sample_transform, Transform};
use crate::error::{invalid, Result};
use crate::rng::SeedSpec;
use crate::stats::{self, quantiles};
use crate::vector::{sample_sparse_unit, sample_unit_sphere, InputVector};

const VECTORS: u64 = 1;
const TRANSFORMS: u64 = 2;

/// Mean and standard deviation of one quantile across transform instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub construction: Construction,
    pub input_family: InputFamily,
    pub axis_value: usize,
    pub probe: f64,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for one trial.
    pub std: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(
        &self,
        construction: Construction,
        family: InputFamily,
        axis_value: usize,
        probe: f64,
    ) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.construction == construction
                && r.input_family == family
                && r.axis_value == axis_value
                && r.probe == probe
        })
    }
}

/// Draw the shared input set for one family. `t` is ignored for sphere vectors.
pub fn input_vectors(
    cfg: &ExperimentConfig,
    family: InputFamily,
    t: usize,
) -> Result<Vec<InputVector>> {
    let param = match family {
        InputFamily::Sparse => t as u64,
        InputFamily::Dense => 0,
    };
    let base = SeedSpec::root(cfg.master_seed).path(&[VECTORS, family.code(), param]);
    (0..cfg.n)
        .into_par_iter()
        .map(|i| {
            let seed = base.child(i as u64);
            match family {
                InputFamily::Sparse => sample_sparse_unit(cfg.d, t, seed),
                InputFamily::Dense => sample_unit_sphere(cfg.d, seed),
            }
        })
        .collect()
}

/// Transform instance `trial` of a construction at target dimension `k`.
pub fn transform_instance(
    cfg: &ExperimentConfig,
    construction: Construction,
    s: usize,
    k: usize,
    trial: usize,
) -> Result<Transform> {
    let s_label = if construction == Construction::Sparse {
        s as u64
    } else {
        0
    };
    let seed = SeedSpec::root(cfg.master_seed).path(&[
        TRANSFORMS,
        construction.code(),
        s_label,
        k as u64,
        trial as u64,
    ]);
    sample_transform(construction.kind(s), k, cfg.d, seed)
}

/// Signed distortions of every vector under one transform instance.
pub fn cell_distortions(
    cfg: &ExperimentConfig,
    construction: Construction,
    s: usize,
    k: usize,
    trial: usize,
    vectors: &[InputVector],
) -> Result<Vec<f64>> {
    let t = transform_instance(cfg, construction, s, k, trial)?;
    Ok(distortion_batch(&t, trial as u64, vectors)?
        .into_iter()
        .map(|d| d.delta)
        .collect())
}

/// Work item: one series point, evaluated on every trial.
#[derive(Debug, Clone, Copy)]
struct Cell {
    construction: Construction,
    family: InputFamily,
    axis_value: usize,
    s: usize,
    k: usize,
    /// index into the vector sets
    vectors: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Runs every cell for every trial and aggregates quantiles of `|Δ|`.
fn run_cells(
    cfg: &ExperimentConfig,
    axis_name: &str,
    axis_values: &[usize],
    cells: &[Cell],
    vector_sets: &[Vec<InputVector>],
) -> Result<SweepResult> {
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(c, trial)| {
            let cell = cells[c];
            let deltas = cell_distortions(
                cfg,
                cell.construction,
                cell.s,
                cell.k,
                trial,
                &vector_sets[cell.vectors],
            )?;
            let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
            Ok(quantiles(&abs, &cfg.probes)?.values)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells.len() * cfg.probes.len());
    for (c, cell) in cells.iter().enumerate() {
        let trials = &per_job[c * cfg.trials..(c + 1) * cfg.trials];
        for (p, &probe) in cfg.probes.iter().enumerate() {
            let values: Vec<f64> = trials.iter().map(|q| q[p]).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SweepRow {
                construction: cell.construction,
                input_family: cell.family,
                axis_value: cell.axis_value,
                probe,
                mean,
                std,
                trials: cfg.trials,
            });
        }
    }
    Ok(SweepResult {
        axis_name: axis_name.to_string(),
        axis_values: axis_values.to_vec(),
        rows,
    })
}

fn check_axis(name: &str, values: &[usize]) -> Result<()> {
    if values.is_empty() {
        return invalid(format!("{name} axis has no values"));
    }
    Ok(())
}

/// Quantiles of `|Δ|` against column sparsity `s`, for sparse and sphere
/// inputs. Constructions other than the graph one do not depend on `s`; their
/// values repeat across the axis as reference series.
pub fn run_sparsity_sweep(cfg: &ExperimentConfig, s_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    check_axis("s", s_values)?;
    if let Some(&s) = s_values.iter().find(|&&s| s == 0 || s > cfg.k) {
        return invalid(format!("s={s} must satisfy 1 <= s <= k={}", cfg.k));
    }
    let families = [InputFamily::Sparse, InputFamily::Dense];
    let vector_sets = families
        .iter()
        .map(|&f| input_vectors(cfg, f, cfg.t))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for (fi, &family) in families.iter().enumerate() {
        for &construction in &cfg.constructions {
            for &s in s_values {
                cells.push(Cell {
                    construction,
                    family,
                    axis_value: s,
                    s: if construction == Construction::Sparse {
                        s
                    } else {
                        cfg.s
                    },
                    k: cfg.k,
                    vectors: fi,
                });
            }
        }
    }
    run_cells(cfg, "s", s_values, &cells, &vector_sets)
}

/// Quantiles of `|Δ|` against input sparsity `t` (sparse inputs only).
pub fn run_input_sparsity_sweep(cfg: &ExperimentConfig, t_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    check_axis("t", t_values)?;
    if let Some(&t) = t_values.iter().find(|&&t| t == 0 || t > cfg.d) {
        return invalid(format!("t={t} must satisfy 1 <= t <= d={}", cfg.d));
    }
    let vector_sets = t_values
        .iter()
        .map(|&t| input_vectors(cfg, InputFamily::Sparse, t))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for &construction in &cfg.constructions {
        for (ti, &t) in t_values.iter().enumerate() {
            cells.push(Cell {
                construction,
                family: InputFamily::Sparse,
                axis_value: t,
                s: cfg.s,
                k: cfg.k,
                vectors: ti,
            });
        }
    }
    run_cells(cfg, "t", t_values, &cells, &vector_sets)
}

/// Quantiles of `|Δ|` against target dimension `k`, for both input families.
pub fn run_k_sweep(cfg: &ExperimentConfig, k_values: &[usize]) -> Result<SweepResult> {
    cfg.validate()?;
    check_axis("k", k_values)?;
    if let Some(&k) = k_values.iter().find(|&&k| k == 0) {
        return invalid(format!("k={k} must be positive"));
    }
    if cfg.has(Construction::Sparse) {
        if let Some(&k) = k_values.iter().find(|&&k| k < cfg.s) {
            return invalid(format!("k={k} is below the column sparsity s={}", cfg.s));
        }
    }
    let families = [InputFamily::Sparse, InputFamily::Dense];
    let vector_sets = families
        .iter()
        .map(|&f| input_vectors(cfg, f, cfg.t))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for (fi, &family) in families.iter().enumerate() {
        for &construction in &cfg.constructions {
            for &k in k_values {
                cells.push(Cell {
                    construction,
                    family,
                    axis_value: k,
                    s: cfg.s,
                    k,
                    vectors: fi,
                });
            }
        }
    }
    run_cells(cfg, "k", k_values, &cells, &vector_sets)
}

/// Evaluation grids for the CDF experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfGrid {
    /// Linear grid over signed `Δ`.
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Logarithmic thresholds for the `|Δ|` tail table.
    pub tail_lo: f64,
    pub tail_hi: f64,
    pub tail_points: usize,
}

impl Default for CdfGrid {
    fn default() -> Self {
        Self {
            lo: -1.0,
            hi: 1.0,
            points: 401,
            tail_lo: 1e-4,
            tail_hi: 1.0,
            tail_points: 41,
        }
    }
}

impl CdfGrid {
    pub fn validate(&self) -> Result<()> {
        if self.lo.partial_cmp(&self.hi) != Some(std::cmp::Ordering::Less) || self.points < 2 {
            return invalid("CDF grid needs lo < hi and at least two points");
        }
        if !(self.tail_lo > 0.0 && self.tail_lo < self.tail_hi) || self.tail_points < 2 {
            return invalid("tail grid needs 0 < tail_lo < tail_hi and at least two points");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let (a, b) = (self.tail_lo.log10(), self.tail_hi.log10());
        let step = (b - a) / (self.tail_points - 1) as f64;
        (0..self.tail_points)
            .map(|i| {
                if i + 1 == self.tail_points {
                    self.tail_hi
                } else {
                    10f64.powf(a + step * i as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    /// `dense`, `ach`, or `sparse-s{s}`.
    pub label: String,
    pub construction: Construction,
    pub s: Option<usize>,
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub thresholds: Vec<f64>,
    /// Fraction of pooled samples with `|Δ|` strictly above each threshold.
    pub tail: Vec<f64>,
    /// Pooled signed distortions, trial-major.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

impl CdfSeries {
    pub fn median_abs(&self) -> f64 {
        let abs: Vec<f64> = self.samples.iter().map(|d| d.abs()).collect();
        stats::quantile(&abs, 0.5).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfReport {
    pub input_family: InputFamily,
    pub series: Vec<CdfSeries>,
}

impl CdfReport {
    pub fn series(&self, label: &str) -> Option<&CdfSeries> {
        self.series.iter().find(|s| s.label == label)
    }
}

/// Empirical CDF of `Δ` pooled over all trials, per construction. The graph
/// construction gets one series per entry of `s_values` (`cfg.s` when empty).
pub fn run_cdf(
    cfg: &ExperimentConfig,
    grid: &CdfGrid,
    family: InputFamily,
    s_values: &[usize],
) -> Result<CdfReport> {
    cfg.validate()?;
    grid.validate()?;
    let s_values = if s_values.is_empty() {
        vec![cfg.s]
    } else {
        s_values.to_vec()
    };
    if let Some(&s) = s_values.iter().find(|&&s| s == 0 || s > cfg.k) {
        return invalid(format!("s={s} must satisfy 1 <= s <= k={}", cfg.k));
    }
    let vectors = input_vectors(cfg, family, cfg.t)?;
    let mut specs: Vec<(Construction, Option<usize>)> = Vec::new();
    for &c in &cfg.constructions {
        if c == Construction::Sparse {
            specs.extend(s_values.iter().map(|&s| (c, Some(s))));
        } else {
            specs.push((c, None));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(i, trial)| {
            let (c, s) = specs[i];
            cell_distortions(cfg, c, s.unwrap_or(cfg.s), cfg.k, trial, &vectors)
        })
        .collect::<Result<_>>()?;

    let grid_points = grid.grid();
    let thresholds = grid.thresholds();
    let mut series = Vec::with_capacity(specs.len());
    for (i, &(construction, s)) in specs.iter().enumerate() {
        let samples: Vec<f64> = per_job[i * cfg.trials..(i + 1) * cfg.trials].concat();
        let cdf = stats::empirical_cdf(&samples, &grid_points)?;
        let abs: Vec<f64> = samples.iter().map(|d| d.abs()).collect();
        let at_or_below = stats::empirical_cdf(&abs, &thresholds)?;
        let label = match s {
            Some(s) => format!("sparse-s{s}"),
            None => construction.label().to_string(),
        };
        series.push(CdfSeries {
            label,
            construction,
            s,
            grid: grid_points.clone(),
            cdf,
            thresholds: thresholds.clone(),
            tail: at_or_below.iter().map(|f| 1.0 - f).collect(),
            samples,
        });
    }
    Ok(CdfReport {
        input_family: family,
        series,
    })
}
