//! Matrix–vector application and distortion.
//!
//! Each output coordinate is accumulated in increasing index order of the
//! input's stored entries, for dense and sparse storage alike. A sparse `x`
//! and its densified copy therefore produce identical sums: the extra dense
//! terms are exact zeros.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{DenseTransform, SparseColumnLayout, Transform};
use crate::error::{invalid, Result};
use crate::vector::{InputVector, Storage};

/// Input vectors handed to [`distortion`] must have unit norm within this.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// One distortion value `‖Rx‖² − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSample {
    pub delta: f64,
    pub transform_instance: u64,
    pub vector_id: u64,
}

fn check_dim(t: &Transform, x: &InputVector) -> Result<()> {
    if x.dim() != t.d() {
        return invalid(format!(
            "input dimension {} does not match transform width {}",
            x.dim(),
            t.d()
        ));
    }
    Ok(())
}

fn apply_dense(t: &DenseTransform, x: &InputVector, y: &mut [f64]) -> usize {
    match x.storage() {
        Storage::Dense(values) => {
            for (r, out) in y.iter_mut().enumerate() {
                *out = t.row(r).iter().zip(values).map(|(a, b)| a * b).sum();
            }
            t.k() * values.len()
        }
        Storage::Sparse { indices, values } => {
            // column gather on a row-major layout: strided, but dense
            // transforms are the baseline, not the fast path
            for (r, out) in y.iter_mut().enumerate() {
                let row = t.row(r);
                *out = indices.iter().zip(values).map(|(&i, v)| row[i] * v).sum();
            }
            t.k() * indices.len()
        }
    }
}

fn apply_graph(t: &SparseColumnLayout, x: &InputVector, y: &mut [f64]) -> usize {
    y.iter_mut().for_each(|v| *v = 0.0);
    let scale = t.scale();
    let mut touched = 0;
    for (i, v) in x.iter() {
        let w = scale * v;
        for (&r, &g) in t.column_rows(i).iter().zip(t.column_signs(i)) {
            y[r as usize] += f64::from(g) * w;
        }
        touched += t.s();
    }
    touched
}

/// `y = Rx` together with the number of stored transform entries read.
///
/// For the graph construction with sparse `x` the count is exactly
/// `nnz(x)·s`.
pub fn apply_counted(t: &Transform, x: &InputVector) -> Result<(Vec<f64>, usize)> {
    check_dim(t, x)?;
    let mut y = vec![0.0; t.k()];
    let touched = match t {
        Transform::Dense(dt) => apply_dense(dt, x, &mut y),
        Transform::Graph(gt) => apply_graph(gt, x, &mut y),
    };
    Ok((y, touched))
}

/// `y = Rx` in `f64`.
pub fn apply(t: &Transform, x: &InputVector) -> Result<Vec<f64>> {
    apply_counted(t, x).map(|(y, _)| y)
}

/// `‖Rx‖² − 1` for a unit vector `x`.
pub fn distortion(t: &Transform, x: &InputVector) -> Result<f64> {
    check_dim(t, x)?;
    let norm = x.norm();
    if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return invalid(format!("distortion needs a unit vector, got norm {norm}"));
    }
    let y = apply(t, x)?;
    Ok(y.iter().map(|v| v * v).sum::<f64>() - 1.0)
}

/// Distortion of every vector in `xs`, in order. Parallel over vectors; the
/// values do not depend on the thread schedule.
pub fn distortion_batch(
    t: &Transform,
    transform_instance: u64,
    xs: &[InputVector],
) -> Result<Vec<DistortionSample>> {
    if let Some(bad) = xs.iter().position(|x| x.dim() != t.d()) {
        return invalid(format!(
            "vector {bad} has dimension {} but the transform expects {}",
            xs[bad].dim(),
            t.d()
        ));
    }
    xs.par_iter()
        .enumerate()
        .map(|(id, x)| {
            distortion(t, x).map(|delta| DistortionSample {
                delta,
                transform_instance,
                vector_id: id as u64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{sample_transform, ConstructionKind};
    use crate::rng::SeedSpec;
    use crate::vector::{sample_sparse_unit, sample_unit_sphere};
    use proptest::prelude::*;

    fn all_kinds() -> [ConstructionKind; 4] {
        [
            ConstructionKind::DenseGaussian,
            ConstructionKind::Rademacher,
            ConstructionKind::AchlioptasSparse,
            ConstructionKind::GraphSparse { s: 4 },
        ]
    }

    #[test]
    fn hand_multiplication() {
        let t = Transform::Dense(DenseTransform::from_row_major(
            2,
            3,
            vec![1.0, 0.0, 2.0, 0.0, -1.0, 1.0],
        ));
        let ones = InputVector::dense(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(apply(&t, &ones).unwrap(), vec![3.0, 0.0]);
        let sparse_ones = InputVector::sparse(3, vec![(0, 1.0), (1, 1.0), (2, 1.0)]).unwrap();
        assert_eq!(apply(&t, &sparse_ones).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn zero_transform_gives_minus_one() {
        let t = Transform::Dense(DenseTransform::from_row_major(3, 4, vec![0.0; 12]));
        let x = sample_unit_sphere(4, SeedSpec::root(2)).unwrap();
        assert_eq!(distortion(&t, &x).unwrap(), -1.0);
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        for kind in all_kinds() {
            let t = sample_transform(kind, 8, 30, SeedSpec::root(1)).unwrap();
            let zero = InputVector::dense(vec![0.0; 30]).unwrap();
            assert!(apply(&t, &zero).unwrap().iter().all(|&v| v == 0.0));
            let empty = InputVector::sparse(30, vec![]).unwrap();
            assert!(apply(&t, &empty).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn one_hot_through_graph_is_exact() {
        for (k, s) in [(50, 16), (10, 3), (7, 7), (9, 1)] {
            let t = sample_transform(
                ConstructionKind::GraphSparse { s },
                k,
                100,
                SeedSpec::root(4),
            )
            .unwrap();
            for i in [0, 17, 99] {
                let x = InputVector::basis(100, i).unwrap();
                let y = apply(&t, &x).unwrap();
                let mag = 1.0 / (s as f64).sqrt();
                let nz: Vec<f64> = y.iter().copied().filter(|&v| v != 0.0).collect();
                assert_eq!(nz.len(), s);
                assert!(nz.iter().all(|&v| v == mag || v == -mag));
                assert!(distortion(&t, &x).unwrap().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = sample_transform(ConstructionKind::Rademacher, 4, 10, SeedSpec::root(1)).unwrap();
        let x = sample_unit_sphere(11, SeedSpec::root(1)).unwrap();
        assert!(apply(&t, &x).is_err());
        assert!(distortion(&t, &x).is_err());
        let good = sample_unit_sphere(10, SeedSpec::root(1)).unwrap();
        let err = distortion_batch(&t, 0, &[good.clone(), good, x]).unwrap_err();
        assert!(err.to_string().contains("vector 2"), "{err}");
    }

    #[test]
    fn non_unit_rejected() {
        let t = sample_transform(ConstructionKind::Rademacher, 4, 3, SeedSpec::root(1)).unwrap();
        let x = InputVector::dense(vec![1.0, 1.0, 0.0]).unwrap();
        assert!(distortion(&t, &x).is_err());
        let nearly = InputVector::dense(vec![1.0 + 1e-11, 0.0, 0.0]).unwrap();
        assert!(distortion(&t, &nearly).is_ok());
    }

    #[test]
    fn batch_edge_cases() {
        let t =
            sample_transform(ConstructionKind::DenseGaussian, 5, 20, SeedSpec::root(1)).unwrap();
        assert!(distortion_batch(&t, 0, &[]).unwrap().is_empty());
        let x = sample_unit_sphere(20, SeedSpec::root(9)).unwrap();
        let b = distortion_batch(&t, 3, std::slice::from_ref(&x)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].delta.to_bits(), distortion(&t, &x).unwrap().to_bits());
        assert_eq!((b[0].transform_instance, b[0].vector_id), (3, 0));
    }

    #[test]
    fn touch_counts() {
        let g = sample_transform(
            ConstructionKind::GraphSparse { s: 16 },
            50,
            1000,
            SeedSpec::root(1),
        )
        .unwrap();
        let x = sample_sparse_unit(1000, 5, SeedSpec::root(2)).unwrap();
        assert_eq!(apply_counted(&g, &x).unwrap().1, 80);
        let dense =
            sample_transform(ConstructionKind::Rademacher, 50, 1000, SeedSpec::root(1)).unwrap();
        assert_eq!(apply_counted(&dense, &x).unwrap().1, 250);
    }

    proptest! {
        #[test]
        fn sparse_and_dense_paths_agree(kind_ix in 0usize..4, t_nnz in 1usize..40, seed: u64) {
            let kind = all_kinds()[kind_ix];
            let tr = sample_transform(kind, 12, 40, SeedSpec::new(seed, 1)).unwrap();
            let x = sample_sparse_unit(40, t_nnz, SeedSpec::new(seed, 2)).unwrap();
            let a = apply(&tr, &x).unwrap();
            let b = apply(&tr, &x.densified()).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }

        #[test]
        fn power_of_two_scaling_is_exact(kind_ix in 0usize..4, exp in -20i32..20, seed: u64) {
            let kind = all_kinds()[kind_ix];
            let tr = sample_transform(kind, 10, 60, SeedSpec::new(seed, 1)).unwrap();
            let x = sample_unit_sphere(60, SeedSpec::new(seed, 2)).unwrap();
            let c = 2f64.powi(exp);
            let base: f64 = apply(&tr, &x).unwrap().iter().map(|v| v * v).sum();
            let scaled: f64 = apply(&tr, &x.scaled(c)).unwrap().iter().map(|v| v * v).sum();
            let expected = c * c * base;
            let ulps = (scaled.to_bits() as i64 - expected.to_bits() as i64).unsigned_abs();
            prop_assert!(ulps <= 8, "{} vs {}", scaled, expected);
        }

        #[test]
        fn general_scaling_relative(kind_ix in 0usize..4, c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], seed: u64) {
            let kind = all_kinds()[kind_ix];
            let tr = sample_transform(kind, 10, 60, SeedSpec::new(seed, 1)).unwrap();
            let x = sample_unit_sphere(60, SeedSpec::new(seed, 2)).unwrap();
            let base: f64 = apply(&tr, &x).unwrap().iter().map(|v| v * v).sum();
            let scaled: f64 = apply(&tr, &x.scaled(c)).unwrap().iter().map(|v| v * v).sum();
            prop_assert!((scaled - c * c * base).abs() <= 1e-12 * c * c * base.max(1e-3));
        }

        #[test]
        fn delta_at_least_minus_one(kind_ix in 0usize..4, seed: u64) {
            let tr = sample_transform(all_kinds()[kind_ix], 6, 25, SeedSpec::new(seed, 1)).unwrap();
            let x = sample_unit_sphere(25, SeedSpec::new(seed, 2)).unwrap();
            prop_assert!(distortion(&tr, &x).unwrap() >= -1.0);
        }
    }
}
