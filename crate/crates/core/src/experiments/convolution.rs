use super::{z_score, Z_THRESHOLD};
use crate::error::{Error, Result};
use crate::montecarlo::{combined_se, Engine, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;
use crate::tree::LevelVector;

pub const MIN_SAMPLES: usize = 10_000;

/// Compares `∫ γ_n(√(1+a²)K + a z) dγ_n(z)` with `γ_n(K)`.
///
/// The double integral is estimated by joint sampling: draw `x` and `z`
/// independently from `γ_n` and record whether `x ∈ √(1+a²)K + a z`. The
/// direct estimate of `γ_n(K)` uses an independent stream.
pub fn verify_convolution(
    engine: &Engine,
    set: &BorelSet,
    a: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            min: MIN_SAMPLES,
            found: samples,
        });
    }
    if !a.is_finite() {
        return Err(crate::error::invalid("a must be finite"));
    }
    let n = set.determination_level();
    let scale = (1.0 + a * a).sqrt();
    let direct = engine.estimate_measure(set, n, samples, &stream.fork(1))?;
    let joint = engine.estimate_event(&stream.fork(2), samples, |rng| {
        let x = LevelVector::sample(n, rng)?;
        let z = LevelVector::sample(n, rng)?;
        let shift = z.scale(a);
        let image = BorelSet::affine_image(set, scale, shift)?;
        image.contains(&x)
    })?;
    let diff = joint.estimate - direct.estimate;
    let se = combined_se(&joint, &direct);

    let mut b = ReportBuilder::new("verify-convolve", stream.master_seed);
    b.param("a", a)
        .param("samples", samples)
        .param("level", n)
        .param(
            "set",
            serde_json::from_str::<serde_json::Value>(&set.to_json()).expect("valid JSON"),
        )
        .observe("direct_estimate", direct.estimate)
        .observe("direct_se", direct.se())
        .observe("fubini_estimate", joint.estimate)
        .observe("fubini_se", joint.se())
        .observe("difference", diff)
        .observe("difference_z", z_score(diff, se))
        .max("difference_z", Z_THRESHOLD);
    Ok(b.finish())
}
