//! Behaviour of the four experiments at reduced size.

use jl_sparse::experiments::output::write_sweep_csv;
use jl_sparse::experiments::runner::{cell_distortions, input_vectors};
use jl_sparse::experiments::{
    run_cdf, run_input_sparsity_sweep, run_k_sweep, run_sparsity_sweep, CdfGrid, Construction,
    ExperimentConfig, InputFamily, SweepResult,
};
use jl_sparse::stats::{ks_distance, Estimate};

fn cfg() -> ExperimentConfig {
    ExperimentConfig {
        n: 300,
        d: 400,
        trials: 8,
        master_seed: 21,
        ..Default::default()
    }
}

/// 4-SE agreement between two series means, SE from the across-trial spread.
fn series_agree(
    r: &SweepResult,
    a: Construction,
    b: Construction,
    fam: InputFamily,
    axis: usize,
    probe: f64,
) -> bool {
    let x = r.row(a, fam, axis, probe).unwrap();
    let y = r.row(b, fam, axis, probe).unwrap();
    let se = ((x.std.powi(2) + y.std.powi(2)) / x.trials as f64).sqrt();
    (x.mean - y.mean).abs() < 4.0 * se
}

#[test]
fn sparsity_sweep_series() {
    let c = cfg();
    let s_values = [1, 2, 4, 8, 16, 50];
    let r = run_sparsity_sweep(&c, &s_values).unwrap();
    assert_eq!(r.axis_name, "s");
    for &s in &s_values {
        for fam in [InputFamily::Sparse, InputFamily::Dense] {
            for con in Construction::ALL {
                assert!(r.row(con, fam, s, 0.5).is_some());
                assert!(r.row(con, fam, s, 0.99).is_some());
            }
        }
    }
    // at s = k the graph construction is a dense ±1/sqrt(k) matrix
    assert!(series_agree(
        &r,
        Construction::Sparse,
        Construction::Ach,
        InputFamily::Dense,
        50,
        0.5
    ));
    // the Ach reference does not depend on s
    let a1 = r
        .row(Construction::Ach, InputFamily::Sparse, 1, 0.99)
        .unwrap();
    let a16 = r
        .row(Construction::Ach, InputFamily::Sparse, 16, 0.99)
        .unwrap();
    assert_eq!(a1.mean, a16.mean);
    // with t=5 sparse inputs, s=1 usually has no collisions at all
    assert!(
        r.row(Construction::Sparse, InputFamily::Sparse, 1, 0.5)
            .unwrap()
            .mean
            <= 1e-12
    );
}

#[test]
fn single_trial_rerun_bit_identical() {
    let c = ExperimentConfig { trials: 1, ..cfg() };
    let a = run_sparsity_sweep(&c, &[2, 8]).unwrap();
    let b = run_sparsity_sweep(&c, &[2, 8]).unwrap();
    assert_eq!(a, b);
    assert!(a.rows.iter().all(|r| r.std == 0.0));
}

#[test]
fn input_sparsity_sweep_shape() {
    let c = cfg();
    let r = run_input_sparsity_sweep(&c, &[1, 2, c.d]).unwrap();
    let zero_med = r
        .row(Construction::Sparse, InputFamily::Sparse, 1, 0.5)
        .unwrap();
    let zero_p99 = r
        .row(Construction::Sparse, InputFamily::Sparse, 1, 0.99)
        .unwrap();
    assert!(zero_med.mean <= 1e-12 && zero_p99.mean <= 1e-12);
    assert!(
        r.row(Construction::Sparse, InputFamily::Sparse, 2, 0.99)
            .unwrap()
            .mean
            > 0.0
    );
    for probe in [0.5, 0.99] {
        assert!(series_agree(
            &r,
            Construction::Sparse,
            Construction::Ach,
            InputFamily::Sparse,
            c.d,
            probe
        ));
    }
}

#[test]
fn one_hot_inputs_exactly_preserved() {
    let c = cfg();
    let vs = input_vectors(&c, InputFamily::Sparse, 1).unwrap();
    for trial in 0..c.trials {
        let deltas = cell_distortions(&c, Construction::Sparse, c.s, c.k, trial, &vs).unwrap();
        assert!(deltas.iter().all(|d| d.abs() <= 1e-12));
    }
}

#[test]
fn k_sweep_scaling_and_sparse_advantage() {
    let c = cfg();
    let ks = [16, 50, 200];
    let r = run_k_sweep(&c, &ks).unwrap();
    for con in Construction::ALL {
        let m50 = r.row(con, InputFamily::Dense, 50, 0.5).unwrap().mean;
        let m200 = r.row(con, InputFamily::Dense, 200, 0.5).unwrap().mean;
        let ratio = m50 / m200;
        assert!((ratio - 2.0).abs() <= 0.4, "{con}: ratio {ratio}");
    }
    for &k in &ks {
        for probe in [0.5, 0.99] {
            let sparse = r
                .row(Construction::Sparse, InputFamily::Sparse, k, probe)
                .unwrap()
                .mean;
            for other in [
                r.row(Construction::Dense, InputFamily::Sparse, k, probe)
                    .unwrap()
                    .mean,
                r.row(Construction::Ach, InputFamily::Sparse, k, probe)
                    .unwrap()
                    .mean,
                r.row(Construction::Dense, InputFamily::Dense, k, probe)
                    .unwrap()
                    .mean,
            ] {
                assert!(sparse < other, "k={k} p={probe}: {sparse} vs {other}");
            }
        }
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_sweep_csv(&r, &mut a).unwrap();
    write_sweep_csv(&run_k_sweep(&c, &ks).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cdf_small_s_lower_median_heavier_tail() {
    let c = ExperimentConfig { n: 1000, ..cfg() };
    let rep = run_cdf(&c, &CdfGrid::default(), InputFamily::Sparse, &[1, 16]).unwrap();
    let low = rep.series("sparse-s1").unwrap();
    let high = rep.series("sparse-s16").unwrap();
    assert!(low.median_abs() < high.median_abs());
    // |Δ| tails must cross: s=1 is above s=16 at some large threshold
    let crossing = low
        .thresholds
        .iter()
        .zip(low.tail.iter().zip(&high.tail))
        .find(|(_, (l, h))| l > h);
    assert!(
        crossing.is_some(),
        "no crossing: {:?} vs {:?}",
        low.tail,
        high.tail
    );
    for s in &rep.series {
        let hi = *s.grid.last().unwrap();
        let below = s.samples.iter().filter(|&&x| x <= hi).count() as f64 / s.samples.len() as f64;
        assert_eq!(*s.cdf.last().unwrap(), below, "{}", s.label);
    }
    let top = rep
        .series
        .iter()
        .flat_map(|s| s.samples.iter().copied())
        .fold(f64::MIN, f64::max);
    let wide = CdfGrid {
        hi: top.max(1.0),
        ..CdfGrid::default()
    };
    let rep = run_cdf(&c, &wide, InputFamily::Sparse, &[1, 16]).unwrap();
    for s in &rep.series {
        assert_eq!(*s.cdf.last().unwrap(), 1.0, "{}", s.label);
    }
}

#[test]
fn dense_and_ach_cdfs_close() {
    let c = ExperimentConfig {
        n: 2000,
        d: 300,
        trials: 50,
        constructions: vec![Construction::Dense, Construction::Ach],
        ..cfg()
    };
    let rep = run_cdf(&c, &CdfGrid::default(), InputFamily::Dense, &[]).unwrap();
    let dense = rep.series("dense").unwrap();
    let ach = rep.series("ach").unwrap();
    assert!(dense.samples.len() >= 100_000);
    let ks = ks_distance(&dense.samples, &ach.samples).unwrap();
    assert!(ks < 0.05, "KS {ks}");
}

#[test]
fn pooled_mean_distortion_zero() {
    let c = cfg();
    for fam in [InputFamily::Sparse, InputFamily::Dense] {
        let vs = input_vectors(&c, fam, c.t).unwrap();
        for con in Construction::ALL {
            // one group per transform instance
            let groups: Vec<Vec<f64>> = (0..c.trials)
                .map(|trial| cell_distortions(&c, con, c.s, c.k, trial, &vs).unwrap())
                .collect();
            let est = Estimate::from_groups(&groups);
            assert!(est.agrees_with(0.0), "{con} {fam}: {est:?}");
        }
    }
}
