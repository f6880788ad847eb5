//! Statistical self-checks run by `jl-sparse verify`.

use rayon::prelude::*;
use serde::Serialize;

use crate::apply::distortion;
use crate::construction::{sample_transform, ConstructionKind};
use crate::error::Result;
use crate::rng::SeedSpec;
use crate::stats::{self, Estimate};
use crate::vector::{sample_sparse_unit, sample_unit_sphere};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

const KINDS: [ConstructionKind; 4] = [
    ConstructionKind::DenseGaussian,
    ConstructionKind::Rademacher,
    ConstructionKind::AchlioptasSparse,
    ConstructionKind::GraphSparse { s: 16 },
];

fn one_hot_exact(seed: SeedSpec) -> Result<CheckOutcome> {
    let (k, s, d) = (50, 16, 1000);
    let t = sample_transform(ConstructionKind::GraphSparse { s }, k, d, seed.child(0))?;
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let x = sample_sparse_unit(d, 1, seed.path(&[1, i]))?;
        worst = worst.max(distortion(&t, &x)?.abs());
    }
    Ok(CheckOutcome::new(
        "one-hot inputs have zero distortion under the graph construction",
        worst <= 1e-12,
        format!("max |delta| = {worst:e}"),
    ))
}

fn column_layout(seed: SeedSpec) -> Result<CheckOutcome> {
    let mut bad = 0;
    for i in 0..10 {
        let t = sample_transform(
            ConstructionKind::GraphSparse { s: 16 },
            50,
            1000,
            seed.child(i),
        )?;
        bad += t.as_graph().map_or(1000, |g| g.violations().len());
    }
    Ok(CheckOutcome::new(
        "every graph column has exactly s distinct rows",
        bad == 0,
        format!("{bad} violating columns over 10 transforms"),
    ))
}

fn unbiased(kind: ConstructionKind, seed: SeedSpec) -> Result<CheckOutcome> {
    let (k, d) = (50, 1000);
    let vectors = (0..1000u64)
        .map(|i| sample_unit_sphere(d, seed.path(&[1, i])))
        .collect::<Result<Vec<_>>>()?;
    let per_instance: Vec<Vec<f64>> = (0..10u64)
        .into_par_iter()
        .map(|inst| {
            let t = sample_transform(kind, k, d, seed.path(&[2, inst]))?;
            vectors.iter().map(|x| distortion(&t, x)).collect()
        })
        .collect::<Result<_>>()?;
    let est = Estimate::from_groups(&per_instance);
    Ok(CheckOutcome::new(
        format!("{kind}: mean distortion is zero"),
        est.agrees_with(0.0),
        format!("mean {:.3e} (se {:.3e})", est.mean, est.standard_error),
    ))
}

fn gaussian_variance(seed: SeedSpec) -> Result<CheckOutcome> {
    let k = 50;
    let norms = stats::squared_norm_samples(ConstructionKind::DenseGaussian, k, 100, 10_000, seed)?;
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    let var = norms.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (norms.len() - 1) as f64;
    let target = 2.0 / k as f64;
    Ok(CheckOutcome::new(
        "gaussian: variance of squared norm is 2/k",
        (var - target).abs() <= 0.15 * target,
        format!("variance {var:.5} vs {target:.5}"),
    ))
}

fn fourth_moment(kind: ConstructionKind, seed: SeedSpec) -> Result<CheckOutcome> {
    let est = stats::fourth_moment_check(kind, 256, 25_000, seed)?;
    let passed = match kind {
        ConstructionKind::DenseGaussian => est.agrees_with(3.0),
        _ => est.mean <= 3.0 + stats::SE_BAND * est.standard_error,
    };
    Ok(CheckOutcome::new(
        format!("{kind}: fourth moment on the all-equal vector"),
        passed,
        format!("{:.4} (se {:.4})", est.mean, est.standard_error),
    ))
}

fn collision_distribution(seed: SeedSpec) -> Result<CheckOutcome> {
    let counts = stats::collision_samples(4, 2, 100_000, seed)?;
    let mut hist = [0u64; 3];
    for c in counts {
        hist[c] += 1;
    }
    let probs: Vec<f64> = (0..3)
        .map(|x| stats::hypergeometric_pmf(4, 2, 2, x))
        .collect();
    let test = stats::chi_square_gof(&hist, &probs)?;
    Ok(CheckOutcome::new(
        "k=4, s=2 collision counts follow Hypergeometric(4, 2, 2)",
        test.p_value >= 0.001,
        format!(
            "counts {hist:?}, chi2 {:.3}, p {:.4}",
            test.statistic, test.p_value
        ),
    ))
}

fn collision_mean(seed: SeedSpec) -> Result<CheckOutcome> {
    let r = stats::collision_tail_check(50, 16, 10_000, seed)?;
    Ok(CheckOutcome::new(
        "k=50, s=16 collision mean s^2/k and tail",
        r.mean.agrees_with(r.expected_mean) && r.tail_agrees(),
        format!(
            "mean {:.4} (se {:.4}) vs {}; P[X > {}] {:.4} vs exact {:.4}",
            r.mean.mean,
            r.mean.standard_error,
            r.expected_mean,
            r.threshold,
            r.empirical_exceedance,
            r.exact_tail
        ),
    ))
}

fn tail(kind: ConstructionKind, seed: SeedSpec) -> Result<CheckOutcome> {
    let r = stats::tail_bound_report(kind, 200, 100, 0.5, 10_000, seed)?;
    Ok(CheckOutcome::new(
        format!("{kind}: P[|delta| > 0.5] at k=200 within its bound"),
        r.within_bound(),
        format!(
            "rate {:.5} vs bound {:.5}",
            r.empirical_failure_rate, r.bound
        ),
    ))
}

/// Runs every check with streams derived from `master_seed`.
pub fn run_checks(master_seed: u64) -> Result<Vec<CheckOutcome>> {
    let root = SeedSpec::root(master_seed).child(0x7665_7269_6679);
    let mut out = vec![one_hot_exact(root.child(1))?, column_layout(root.child(2))?];
    for (i, kind) in KINDS.into_iter().enumerate() {
        out.push(unbiased(kind, root.path(&[3, i as u64]))?);
    }
    out.push(gaussian_variance(root.child(4))?);
    for (i, kind) in KINDS[..3].iter().enumerate() {
        out.push(fourth_moment(*kind, root.path(&[5, i as u64]))?);
    }
    out.push(collision_distribution(root.child(6))?);
    out.push(collision_mean(root.child(7))?);
    for (i, kind) in KINDS[..3].iter().enumerate() {
        out.push(tail(*kind, root.path(&[8, i as u64]))?);
    }
    Ok(out)
}
