//! Johnson–Lindenstrauss random projections: dense Gaussian, Rademacher,
//! Achlioptas and the sparse graph construction, plus the statistical checks
//! and distortion experiments built on top of them.

pub mod apply;
pub mod construction;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod stats;
pub mod vector;

pub use apply::{apply, apply_counted, distortion, distortion_batch, DistortionSample};
pub use construction::{
    sample_rows_without_replacement, sample_transform, ConstructionKind, DenseTransform,
    SparseColumnLayout, Transform,
};
pub use error::{JlError, Result};
pub use rng::{derive_stream, SeedSpec};
pub use vector::{sample_sparse_unit, sample_unit_sphere, InputVector};
