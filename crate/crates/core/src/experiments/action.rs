use crate::error::{invalid, Result};
use crate::group::action_identity_residual;
use crate::montecarlo::RngStream;
use crate::report::{ExperimentReport, ReportBuilder};
use crate::tree::sample_tree;

/// Largest tolerated entrywise residual of the action identity.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Checks `π_n(g_{s,k}·y) = (π_n(y) + i s U_{n,k}(y)) / √(1+s²)` on `trials`
/// random trees of depth `k + 2`.
pub fn verify_action_identity(n: u32, k: u32, s: f64, trials: usize, stream: &RngStream) -> Result<ExperimentReport> {
    if k < n {
        return Err(invalid(format!("need n ≤ k, got n = {n}, k = {k}")));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let depth = k + 2;
    let mut rng = stream.rng();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let y = sample_tree(depth, &mut rng)?;
        worst = worst.max(action_identity_residual(&y, n, k, s)?);
    }
    let mut b = ReportBuilder::new("verify-action-identity", stream.master_seed);
    b.param("n", n)
        .param("k", k)
        .param("s", s)
        .param("trials", trials)
        .param("depth", depth)
        .observe("max_residual", worst)
        .max("max_residual", RESIDUAL_TOL);
    Ok(b.finish())
}
