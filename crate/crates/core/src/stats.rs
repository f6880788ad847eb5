//! Empirical checks of the concentration results: quantiles, CDFs, tail
//! rates against their exponential bounds, fourth moments and column
//! collision counts for the graph construction.
//!
//! Statistical comparisons in this crate use a 4-standard-error band
//! (about 6e-5 two-sided false-alarm rate per check).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;

use crate::apply::apply;
use crate::construction::{sample_transform, ConstructionKind, SparseColumnLayout};
use crate::error::{invalid, Result};
use crate::rng::SeedSpec;
use crate::vector::{sample_unit_sphere, InputVector};

/// Width of the acceptance band, in standard errors.
pub const SE_BAND: f64 = 4.0;

/// Rows per transform instance in [`fourth_moment_check`].
pub const FOURTH_MOMENT_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub probes: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub kind: ConstructionKind,
    pub k: usize,
    pub epsilon: f64,
    pub empirical_failure_rate: f64,
    /// Binomial standard error of the empirical rate.
    pub standard_error: f64,
    pub bound: f64,
    pub n: usize,
}

impl TailReport {
    /// Empirical rate does not exceed the bound by more than the 4-SE band.
    pub fn within_bound(&self) -> bool {
        self.empirical_failure_rate <= self.bound + SE_BAND * self.standard_error
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            standard_error: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Grand mean over equally sized groups that share a random instance
    /// (for example one transform applied to many vectors). The standard error
    /// comes from the spread of the group means, so it includes the
    /// between-instance variance.
    pub fn from_groups(groups: &[Vec<f64>]) -> Self {
        let means: Vec<f64> = groups
            .iter()
            .map(|g| g.iter().sum::<f64>() / g.len() as f64)
            .collect();
        let by_group = Self::from_samples(&means);
        Self {
            n: groups.iter().map(Vec::len).sum(),
            ..by_group
        }
    }

    /// `|mean − target| ≤ 4·SE`.
    pub fn agrees_with(&self, target: f64) -> bool {
        (self.mean - target).abs() <= SE_BAND * self.standard_error
    }
}

/// 0-based nearest-rank index `ceil(p·n) − 1`.
///
/// `p·n` is snapped to the nearest integer when within `1e-9` of it, so
/// products such as `0.07 · 100 = 7.000000000000001` land on the intended
/// rank.
pub fn nearest_rank_index(n: usize, p: f64) -> usize {
    let x = p * n as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, n) - 1
}

fn check_probe(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("quantile probe {p} must lie in (0, 1)"));
    }
    Ok(())
}

fn sorted_copy(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    if samples.iter().any(|v| v.is_nan()) {
        return invalid("samples contain NaN");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Nearest-rank quantile.
pub fn quantile(samples: &[f64], p: f64) -> Result<f64> {
    check_probe(p)?;
    let sorted = sorted_copy(samples)?;
    Ok(sorted[nearest_rank_index(sorted.len(), p)])
}

/// Nearest-rank quantiles for several probes with a single sort.
pub fn quantiles(samples: &[f64], probes: &[f64]) -> Result<QuantileSummary> {
    for &p in probes {
        check_probe(p)?;
    }
    let sorted = sorted_copy(samples)?;
    let values = probes
        .iter()
        .map(|&p| sorted[nearest_rank_index(sorted.len(), p)])
        .collect();
    Ok(QuantileSummary {
        probes: probes.to_vec(),
        values,
        n: sorted.len(),
    })
}

/// Fraction of `samples` at or below each grid point. `grid` must be sorted.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| {
        !matches!(
            w[0].partial_cmp(&w[1]),
            Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal)
        )
    }) {
        return invalid("CDF grid must be sorted ascending");
    }
    let sorted = sorted_copy(samples)?;
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&g| sorted.partition_point(|&v| v <= g) as f64 / n)
        .collect())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_copy(a)?;
    let b = sorted_copy(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Rows where columns `i` and `j` of the layout are both nonzero.
pub fn collision_count(layout: &SparseColumnLayout, i: usize, j: usize) -> Result<usize> {
    if i == j {
        return invalid("collision count needs two distinct columns");
    }
    if i >= layout.d() || j >= layout.d() {
        return invalid(format!("column out of range for d={}", layout.d()));
    }
    let (a, b) = (layout.column_rows(i), layout.column_rows(j));
    let (mut p, mut q, mut hits) = (0, 0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                hits += 1;
                p += 1;
                q += 1;
            }
        }
    }
    Ok(hits)
}

/// `P[X = x]` for `X ~ Hypergeometric(population, successes, draws)`, via
/// log-binomials. Impossible outcomes give 0.
pub fn hypergeometric_pmf(population: u64, successes: u64, draws: u64, x: u64) -> f64 {
    if successes > population || draws > population {
        return 0.0;
    }
    if x > successes || x > draws || draws - x > population - successes {
        return 0.0;
    }
    (ln_binomial(successes, x) + ln_binomial(population - successes, draws - x)
        - ln_binomial(population, draws))
    .exp()
}

/// `P[X > threshold]` for the collision count `X ~ Hypergeometric(k, s, s)`.
pub fn hypergeometric_upper_tail(k: u64, s: u64, threshold: f64) -> f64 {
    (0..=s)
        .filter(|&x| x as f64 > threshold)
        .map(|x| hypergeometric_pmf(k, s, s, x))
        .sum()
}

/// Collision counts of `num_pairs` independent column pairs. Samples one
/// graph layout with `2·num_pairs` columns and pairs columns `(2p, 2p+1)`.
pub fn collision_samples(
    k: usize,
    s: usize,
    num_pairs: usize,
    seed: SeedSpec,
) -> Result<Vec<usize>> {
    let t = sample_transform(
        ConstructionKind::GraphSparse { s },
        k,
        2 * num_pairs.max(1),
        seed,
    )?;
    let layout = t.as_graph().expect("graph construction");
    (0..num_pairs)
        .map(|p| collision_count(layout, 2 * p, 2 * p + 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionTailReport {
    pub k: usize,
    pub s: usize,
    pub num_pairs: usize,
    /// `2·s²/k`.
    pub threshold: f64,
    pub empirical_exceedance: f64,
    pub standard_error: f64,
    pub exact_tail: f64,
    pub mean: Estimate,
    /// `s²/k`.
    pub expected_mean: f64,
}

impl CollisionTailReport {
    pub fn tail_agrees(&self) -> bool {
        let se = self
            .standard_error
            .max((self.exact_tail * (1.0 - self.exact_tail) / self.num_pairs as f64).sqrt());
        (self.empirical_exceedance - self.exact_tail).abs() <= SE_BAND * se
    }
}

/// Fraction of sampled column pairs with more than `2s²/k` collisions,
/// alongside the exact hypergeometric tail.
pub fn collision_tail_check(
    k: usize,
    s: usize,
    num_pairs: usize,
    seed: SeedSpec,
) -> Result<CollisionTailReport> {
    if s == 0 || s > k {
        return invalid(format!("need 1 <= s <= k, got s={s}, k={k}"));
    }
    if num_pairs == 0 {
        return invalid("num_pairs must be positive");
    }
    let counts = collision_samples(k, s, num_pairs, seed)?;
    let threshold = 2.0 * (s * s) as f64 / k as f64;
    let exceed = counts.iter().filter(|&&c| c as f64 > threshold).count();
    let rate = exceed as f64 / num_pairs as f64;
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(CollisionTailReport {
        k,
        s,
        num_pairs,
        threshold,
        empirical_exceedance: rate,
        standard_error: (rate * (1.0 - rate) / num_pairs as f64).sqrt(),
        exact_tail: hypergeometric_upper_tail(k as u64, s as u64, threshold),
        mean: Estimate::from_samples(&as_f64),
        expected_mean: (s * s) as f64 / k as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts to `probs`. Cells with zero
/// expected probability must have zero counts and are dropped.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return invalid("observed and expected lengths differ");
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return invalid("no observations");
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquareTest {
                    statistic: f64::INFINITY,
                    dof: 0,
                    p_value: 0.0,
                });
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return invalid("chi-square test needs at least two possible cells");
    }
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value: 1.0 - dist.cdf(stat),
    })
}

/// Theoretical two-sided tail bound: `2·exp(−kε²/8)` for Gaussian entries,
/// `2·exp(−kε²/12)` for the discrete constructions.
pub fn tail_bound(kind: ConstructionKind, k: usize, epsilon: f64) -> f64 {
    let c = match kind {
        ConstructionKind::DenseGaussian => 8.0,
        _ => 12.0,
    };
    2.0 * (-(k as f64) * epsilon * epsilon / c).exp()
}

/// `‖Rv‖²` over `trials` independent (transform, sphere vector) pairs.
pub fn squared_norm_samples(
    kind: ConstructionKind,
    k: usize,
    d: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let cell = seed.child(trial as u64);
            let t = sample_transform(kind, k, d, cell.child(0))?;
            let v = sample_unit_sphere(d, cell.child(1))?;
            Ok(apply(&t, &v)?.iter().map(|y| y * y).sum())
        })
        .collect()
}

/// Fraction of independent trials with `|Δ| > ε`, next to the bound.
pub fn tail_bound_report(
    kind: ConstructionKind,
    k: usize,
    d: usize,
    epsilon: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<TailReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon={epsilon} must lie in (0, 1)"));
    }
    if trials == 0 {
        return invalid("trials must be positive");
    }
    let norms = squared_norm_samples(kind, k, d, trials, seed)?;
    let failures = norms.iter().filter(|&&q| (q - 1.0).abs() > epsilon).count();
    let rate = failures as f64 / trials as f64;
    Ok(TailReport {
        kind,
        k,
        epsilon,
        empirical_failure_rate: rate,
        standard_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        bound: tail_bound(kind, k, epsilon),
        n: trials,
    })
}

/// Monte Carlo estimate of `E[(R_j v)^4]` for unit-variance rows on the
/// all-equal vector `v = (1/√d, …, 1/√d)`.
///
/// Each trial samples a fresh `FOURTH_MOMENT_ROWS × d` transform; every row
/// gives one sample `(R_j v)^4 · k²`, the factor `k²` undoing the stored
/// `1/√k` scaling.
pub fn fourth_moment_check(
    kind: ConstructionKind,
    d: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<Estimate> {
    if !kind.is_dense() {
        return invalid("fourth moment check applies to the dense entry distributions");
    }
    if d == 0 || trials == 0 {
        return invalid("d and trials must be positive");
    }
    let k = FOURTH_MOMENT_ROWS;
    let v = InputVector::dense(vec![1.0 / (d as f64).sqrt(); d])?;
    let k2 = (k * k) as f64;
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let t = sample_transform(kind, k, d, seed.child(trial as u64))?;
            Ok(apply(&t, &v)?.iter().map(|y| y.powi(4) * k2).collect())
        })
        .collect::<Result<_>>()?;
    let samples: Vec<f64> = per_trial.into_iter().flatten().collect();
    Ok(Estimate::from_samples(&samples))
}
