//! The dyadic Gaussian tree process, the action of circle-valued step
//! functions on it, and Monte Carlo verifiers for the identities that make
//! that action whirly.
//!
//! * [`tree`]: exact samplers for the process and its conditional laws,
//!   projections, U-statistics and the innovation coordinates.
//! * [`group`]: step-function group elements, the whirling elements
//!   `g_{s,k}` and the action on trees.
//! * [`sets`]: finite-level Borel sets as membership predicates.
//! * [`montecarlo`]: seeded, worker-count-independent estimators.
//! * [`experiments`]: one verifier per identity, each producing an
//!   [`ExperimentReport`].
//! * [`suite`]: the full acceptance battery.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod group;
pub mod montecarlo;
pub mod path;
pub mod report;
pub mod sets;
pub mod suite;
pub mod tree;

pub use error::{Error, Result};
pub use group::{make_gsk, uniform_distance, GroupElement};
pub use montecarlo::{wilson_interval, Engine, JointTable, MeasureEstimate, RngStream, TreeLaw};
pub use path::DyadicPath;
pub use report::{ExperimentReport, ReportBuilder};
pub use sets::{BoolOp, BorelSet, SetSpec};
pub use tree::{phi_roundtrip, sample_conditional, sample_tree, LevelVector, TreeSample};
