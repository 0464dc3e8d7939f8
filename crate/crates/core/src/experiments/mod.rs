//! One verifier per quantitative statement about the tree process and the
//! action. Each returns an [`ExperimentReport`](crate::report::ExperimentReport)
//! whose pass flag is a function of its observed values and thresholds.

mod action;
mod continuity;
mod convolution;
mod independence;
mod marginals;
mod positivity;
mod preservation;
mod sharpness;
mod whirly;

pub use action::verify_action_identity;
pub use continuity::{continuity_constants, verify_continuity, ContinuityConfig, DeltaRule, PairMode};
pub use convolution::verify_convolution;
pub use independence::{verify_conditional_independence, IndependenceConfig};
pub use marginals::verify_marginals;
pub use positivity::{delta_quantile, positivity_scan, PositivityConfig};
pub use preservation::{verify_coverage, verify_measure_preservation};
pub use sharpness::{sharpness_check, SharpnessConfig};
pub use whirly::{whirly_search, WhirlyConfig, WhirlyMode};

/// Statistical checks use this many standard errors.
pub const Z_THRESHOLD: f64 = 3.0;

/// Notes attached to reports whose claims hold in infinite dimensions and
/// are checked here only at finite depth.
pub(crate) const FINITE_DEPTH_NOTE: &str =
    "finite-depth surrogate: the almost-everywhere statement is certified only at the sampled depth and sample sizes";

/// `|x| / se`, with `0/0 = 0` and `x/0 = ∞`.
pub(crate) fn z_score(diff: f64, se: f64) -> f64 {
    let d = diff.abs();
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
