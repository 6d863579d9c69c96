//! Compression-based nearest-neighbor learning in general metric spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`]: metric spaces, labeled samples, empirical error, CSV loading.
//! * [`net`]: greedy γ-nets and the Voronoi partitions they induce.
//! * [`bound`]: the sample-compression generalization bound used for scale selection.
//! * [`learner`]: the KSU learner (nets at every candidate scale, majority relabeling,
//!   bound minimization) and compression-scheme verification.
//! * [`knn`]: the classical k-NN baseline.
//! * [`preiss`]: the infinite-dimensional tree space with its exact dyadic metric and sampler.
//! * [`oracle`]: exact rational measure computations on that space.
//! * [`experiment`]: deterministic Monte Carlo experiment runner emitting CSV.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise.

pub mod bound;
pub mod error;
pub mod experiment;
pub mod knn;
pub mod learner;
pub mod metric;
pub mod net;
pub mod oracle;
pub mod par;
pub mod preiss;

pub use error::{Error, Result};
pub use metric::{Euclidean, EuclideanPoint, Label, LabeledSample, MetricSpace};
