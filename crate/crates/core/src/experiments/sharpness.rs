use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::montecarlo::{Engine, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};

pub const MIN_DIMS: usize = 1_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessConfig {
    pub a: f64,
    pub b: f64,
    pub dims: usize,
    pub repetitions: usize,
    /// Allowed distance of the mean preimage statistic from its limit.
    pub tolerance: f64,
}

impl SharpnessConfig {
    pub fn new(a: f64, b: f64, dims: usize, repetitions: usize) -> Self {
        SharpnessConfig {
            a,
            b,
            dims,
            repetitions,
            tolerance: 0.01,
        }
    }
}

/// Root mean square of the first `w.len()` coordinates.
fn rms(w: impl Iterator<Item = f64>, len: usize) -> f64 {
    (w.map(|v| v * v).sum::<f64>() / len as f64).sqrt()
}

/// For real standard Gaussian vectors `x, y`, checks that the root mean
/// square of `a x + b y` concentrates at `√(a² + b²)` and that of
/// `(x - b y)/a` at `√(1 + b²)/|a|`. The second limit equals 1 exactly when
/// `a² = b² + 1`, which is when `a K + b y` can meet `K = {rms = 1}`.
pub fn sharpness_check(engine: &Engine, cfg: &SharpnessConfig, stream: &RngStream) -> Result<ExperimentReport> {
    let SharpnessConfig {
        a,
        b,
        dims,
        repetitions,
        tolerance,
    } = *cfg;
    if a == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(invalid("a must be finite and nonzero, b finite"));
    }
    if dims < MIN_DIMS {
        return Err(invalid(format!("dims must be at least {MIN_DIMS}, got {dims}")));
    }
    if repetitions == 0 {
        return Err(invalid("need at least one repetition"));
    }
    let runs: Vec<(f64, f64)> = engine.install(|| {
        (0..repetitions)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream.fork(r as u64).rng();
                let x: Vec<f64> = StandardNormal.sample_iter(&mut rng).take(dims).collect();
                let y: Vec<f64> = StandardNormal.sample_iter(&mut rng).take(dims).collect();
                let combo = rms(x.iter().zip(&y).map(|(x, y)| a * x + b * y), dims);
                let pre = rms(x.iter().zip(&y).map(|(x, y)| (x - b * y) / a), dims);
                (combo, pre)
            })
            .collect()
    });

    let combo_limit = a.hypot(b);
    let pre_limit = (1.0 + b * b).sqrt() / a.abs();
    let reps = repetitions as f64;
    let mean_combo = runs.iter().map(|r| r.0).sum::<f64>() / reps;
    let mean_pre = runs.iter().map(|r| r.1).sum::<f64>() / reps;
    let worst_combo = runs
        .iter()
        .map(|r| (r.0 - combo_limit).abs() / combo_limit)
        .fold(0.0, f64::max);
    let worst_pre = runs
        .iter()
        .map(|r| (r.1 - pre_limit).abs() / pre_limit)
        .fold(0.0, f64::max);
    let spread = 5.0 / (dims as f64).sqrt();
    let intersects = (a * a - (b * b + 1.0)).abs() <= 1e-12 * (a * a).max(1.0);

    let mut rep = ReportBuilder::new("sharpness", stream.master_seed);
    rep.param("a", a)
        .param("b", b)
        .param("dims", dims)
        .param("repetitions", repetitions)
        .param("a_squared_equals_b_squared_plus_one", intersects)
        .observe("combination_limit", combo_limit)
        .observe("mean_combination_rms", mean_combo)
        .observe("combination_deviation", (mean_combo - combo_limit).abs())
        .observe("max_relative_combination_deviation", worst_combo)
        .observe("preimage_limit", pre_limit)
        .observe("mean_preimage_rms", mean_pre)
        .observe("preimage_deviation", (mean_pre - pre_limit).abs())
        .observe("max_relative_preimage_deviation", worst_pre)
        .observe("distance_from_unit_rms", (mean_pre - 1.0).abs())
        .max("combination_deviation", spread)
        .max("preimage_deviation", tolerance)
        .max("max_relative_combination_deviation", spread)
        .max("max_relative_preimage_deviation", spread);
    Ok(rep.finish())
}
