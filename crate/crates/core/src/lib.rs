//! Transfer learning for nonparametric binary classification under posterior
//! drift.
//!
//! A labeled *target* sample (`Q`) is combined with one or more *source*
//! samples (`P`, `P1..Pm`) whose regression function shares the sign of
//! `η_Q - 1/2` but may carry a weaker signal. The crate provides
//!
//! * exact nearest-neighbor search ([`neighbors`]),
//! * the weighted K-NN rule with rate-optimal counts and weights, the
//!   adaptive signal-to-noise classifier, their multi-source versions and
//!   Lepski's rule ([`classifiers`]),
//! * a synthetic drift model with Monte-Carlo risk evaluation and the
//!   replicated experiment harness ([`simulation`]),
//! * CSV and manifest I/O ([`io`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root name the common `f64` instantiations. The simulation layer
//! works in `f64`.
//!
//! ```
//! use transfer_knn::{classifiers, neighbors::TransferIndex, HyperParams, SampleSet, TransferDataset};
//!
//! let p = SampleSet::from_rows(1, vec![vec![0.0], vec![0.1], vec![0.9]], vec![1, 1, 0]).unwrap();
//! let q = SampleSet::from_rows(1, vec![vec![0.05], vec![0.8]], vec![1, 0]).unwrap();
//! let ds = TransferDataset::new(p, q).unwrap();
//! let hp = HyperParams::single(0.0, 1.0, 0.5, 1).unwrap();
//! let plan = classifiers::theorem1_plan(ds.n_p(), ds.n_q(), &hp).unwrap();
//! let label = classifiers::weighted_knn_predict(&TransferIndex::build(&ds), &plan, &[0.02]).unwrap();
//! assert_eq!(label, 1);
//! ```

// `!(x > 0)` is used deliberately so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod data;
pub mod error;
pub mod io;
pub mod neighbors;
pub mod rng;
pub mod scalar;
pub mod simulation;

pub use data::{validate_dataset, Label};
pub use error::{Error, Origin, Result};
pub use rng::RandomSource;
pub use scalar::Scalar;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type LabeledSample = data::LabeledSample<f64>;
pub type SampleSet = data::SampleSet<f64>;
pub type TransferDataset = data::TransferDataset<f64>;
pub type MultiSourceDataset = data::MultiSourceDataset<f64>;
pub type HyperParams = data::HyperParams<f64>;
pub type KnnPlan = data::KnnPlan<f64>;
pub type MultiKnnPlan = data::MultiKnnPlan<f64>;

pub type LabeledSampleF32 = data::LabeledSample<f32>;
pub type SampleSetF32 = data::SampleSet<f32>;
pub type TransferDatasetF32 = data::TransferDataset<f32>;
pub type MultiSourceDatasetF32 = data::MultiSourceDataset<f32>;
pub type HyperParamsF32 = data::HyperParams<f32>;
pub type KnnPlanF32 = data::KnnPlan<f32>;
pub type MultiKnnPlanF32 = data::MultiKnnPlan<f32>;
