use serde_json::json;

use super::positivity::{delta_quantile, translate_measures};
use super::{FINITE_DEPTH_NOTE, Z_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::group::{make_gsk, GroupElement};
use crate::montecarlo::{Engine, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;
use crate::tree::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WhirlyMode {
    /// Translates by `g_{ε,k}`.
    #[default]
    Whirling,
    /// Negative control: every translate is `K` itself.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhirlyConfig {
    pub epsilon: f64,
    pub samples: usize,
    pub max_depth: u32,
    /// `z` draws and per-`z` samples for the `δ` constant.
    pub z_samples: usize,
    pub inner_samples: usize,
    pub mode: WhirlyMode,
}

impl WhirlyConfig {
    pub fn new(epsilon: f64, samples: usize, max_depth: u32) -> Self {
        WhirlyConfig {
            epsilon,
            samples,
            max_depth,
            z_samples: 200,
            inner_samples: 2_000,
            mode: WhirlyMode::Whirling,
        }
    }
}

/// Searches for `n` and `m` with `γ(∪_{k=n}^{n+m-1} g_{ε,k}·K) > 1 - ε`,
/// requiring the estimate to clear `1 - ε` by three standard errors.
///
/// The constants phase computes `a = -1/ε`, the largest `δ` with
/// `γ_n{z : γ_n(√(1+a²)K + a z) ≥ δ} > √(1-ε/2)` and the smallest `m` with
/// `1 - (1-δ)^m ≥ √(1-ε/2)`; that `m` is sufficient but usually far from
/// necessary, so the search phase scans `m = 1, 2, ...` for each `n` from the
/// determination level of `K`, with `n + m ≤ max_depth`.
pub fn whirly_search(
    engine: &Engine,
    set: &BorelSet,
    cfg: &WhirlyConfig,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    let eps = cfg.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let n0 = set.determination_level();
    if cfg.max_depth <= n0 || cfg.max_depth > MAX_DEPTH {
        return Err(invalid(format!(
            "max depth must lie in {}..={MAX_DEPTH}, got {}",
            n0 + 1,
            cfg.max_depth
        )));
    }
    if cfg.z_samples == 0 {
        return Err(invalid("need at least one z sample"));
    }
    let base = engine.estimate_measure(set, n0, cfg.samples, &stream.fork(0))?;
    if !(base.ci_low() > 0.0) {
        return Err(Error::NullSet);
    }

    let a = -1.0 / eps;
    let target = (1.0 - eps / 2.0).sqrt();
    let translates = translate_measures(engine, set, a, cfg.z_samples, cfg.inner_samples, &stream.fork(1))?;
    let values: Vec<f64> = translates.iter().map(|e| e.estimate).collect();
    let delta = delta_quantile(&values, target);
    let m_theory = delta.filter(|&d| d > 0.0).map(|d| {
        if d >= 1.0 {
            1.0
        } else {
            ((1.0 - target).ln() / (1.0 - d).ln()).ceil().max(1.0)
        }
    });

    let mut scan = Vec::new();
    let mut found = None;
    let mut best_lower = f64::NEG_INFINITY;
    'search: for n in n0..cfg.max_depth {
        for m in 1..=cfg.max_depth - n {
            let translates = (n..n + m)
                .map(|k| {
                    let g = match cfg.mode {
                        WhirlyMode::Whirling => make_gsk(eps, k)?,
                        WhirlyMode::Identity => GroupElement::identity(k + 1)?,
                    };
                    Ok(BorelSet::acted(&g, set))
                })
                .collect::<Result<Vec<_>>>()?;
            let union = BorelSet::union(&translates)?;
            let label = 2 + ((n as u64) << 32 | m as u64);
            let est = engine.estimate_measure(&union, n + m, cfg.samples, &stream.fork(label))?;
            let lower = est.estimate - Z_THRESHOLD * est.se();
            scan.push(json!({ "n": n, "m": m, "estimate": est.estimate, "se": est.se() }));
            if lower > best_lower {
                best_lower = lower;
            }
            if lower > 1.0 - eps {
                found = Some((n, m, est));
                break 'search;
            }
        }
    }

    let mut b = ReportBuilder::new("whirly-search", stream.master_seed);
    b.param("epsilon", eps)
        .param("samples", cfg.samples)
        .param("max_depth", cfg.max_depth)
        .param("z_samples", cfg.z_samples)
        .param("inner_samples", cfg.inner_samples)
        .param(
            "mode",
            match cfg.mode {
                WhirlyMode::Whirling => "whirling",
                WhirlyMode::Identity => "identity-control",
            },
        )
        .param(
            "set",
            serde_json::from_str::<serde_json::Value>(&set.to_json()).expect("valid JSON"),
        )
        .param("scan", scan)
        .param("note", FINITE_DEPTH_NOTE)
        .observe("set_measure", base.estimate)
        .observe("a", a)
        .observe("quantile_target", target)
        .observe("best_union_lower", best_lower);
    if let Some(d) = delta {
        b.observe("delta", d);
    }
    if let Some(m) = m_theory {
        b.observe("m_sufficient", m);
    }
    if let Some((n, m, est)) = found {
        b.observe("found_n", n as f64)
            .observe("found_m", m as f64)
            .observe("union_estimate", est.estimate)
            .observe("union_se", est.se());
    }
    b.gt("best_union_lower", 1.0 - eps);
    Ok(b.finish())
}
