use super::FINITE_DEPTH_NOTE;
use crate::error::{invalid, Error, Result};
use crate::montecarlo::{Engine, MeasureEstimate, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;
use crate::tree::LevelVector;

/// Fraction of sampled `z` whose translate must be certified positive.
pub const MIN_POSITIVE_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityConfig {
    pub a: f64,
    pub z_samples: usize,
    pub inner_samples: usize,
    /// When set, also report the `δ` used with this `ε` by the whirliness
    /// argument.
    pub epsilon: Option<f64>,
}

/// Largest `δ` such that the fraction of `values` at least `δ` exceeds
/// `target`, or `None` when no such value exists.
pub fn delta_quantile(values: &[f64], target: f64) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let needed = (target * sorted.len() as f64).floor() as usize + 1;
    if needed > sorted.len() {
        return None;
    }
    Some(sorted[needed - 1])
}

/// Estimates `γ_n(√(1+a²)K + a z)` for `count` draws of `z ~ γ_n`.
pub(crate) fn translate_measures(
    engine: &Engine,
    set: &BorelSet,
    a: f64,
    count: usize,
    inner_samples: usize,
    stream: &RngStream,
) -> Result<Vec<MeasureEstimate>> {
    let n = set.determination_level();
    let scale = (1.0 + a * a).sqrt();
    let mut zrng = stream.fork(0).rng();
    (0..count)
        .map(|j| {
            let z = LevelVector::sample(n, &mut zrng)?;
            let image = BorelSet::affine_image(set, scale, z.scale(a))?;
            engine.estimate_event(&stream.fork(1 + j as u64), inner_samples, |rng| {
                image.contains(&LevelVector::sample(n, rng)?)
            })
        })
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// For `z ~ γ_n`, estimates `γ_n(√(1+a²)K + a z)` and reports the fraction
/// of draws whose Wilson interval excludes zero.
pub fn positivity_scan(
    engine: &Engine,
    set: &BorelSet,
    cfg: &PositivityConfig,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    if cfg.z_samples == 0 {
        return Err(invalid("need at least one z sample"));
    }
    if !cfg.a.is_finite() {
        return Err(invalid("a must be finite"));
    }
    let n = set.determination_level();
    let base = engine.estimate_measure(set, n, cfg.inner_samples, &stream.fork(0))?;
    if !(base.ci_low() > 0.0) {
        return Err(Error::NullSet);
    }
    let estimates = translate_measures(engine, set, cfg.a, cfg.z_samples, cfg.inner_samples, &stream.fork(1))?;
    let positive = estimates.iter().filter(|e| e.ci_low() > 0.0).count();
    let fraction = positive as f64 / cfg.z_samples as f64;
    let mut values: Vec<f64> = estimates.iter().map(|e| e.estimate).collect();
    values.sort_by(f64::total_cmp);

    let mut b = ReportBuilder::new("positivity-scan", stream.master_seed);
    b.param("a", cfg.a)
        .param("level", n)
        .param("z_samples", cfg.z_samples)
        .param("inner_samples", cfg.inner_samples)
        .param(
            "set",
            serde_json::from_str::<serde_json::Value>(&set.to_json()).expect("valid JSON"),
        )
        .param("note", FINITE_DEPTH_NOTE)
        .observe("set_measure", base.estimate)
        .observe("positive_fraction", fraction)
        .observe(
            "mean_translate_measure",
            values.iter().sum::<f64>() / values.len() as f64,
        )
        .observe("translate_q01", quantile(&values, 0.01))
        .observe("translate_q05", quantile(&values, 0.05))
        .observe("translate_q10", quantile(&values, 0.10))
        .observe("translate_q25", quantile(&values, 0.25))
        .observe("translate_q50", quantile(&values, 0.50))
        .min("positive_fraction", MIN_POSITIVE_FRACTION);
    if let Some(eps) = cfg.epsilon {
        b.param("epsilon", eps);
        if let Some(d) = delta_quantile(&values, (1.0 - eps / 2.0).sqrt()) {
            b.observe("delta_at_epsilon", d);
        }
    }
    Ok(b.finish())
}
