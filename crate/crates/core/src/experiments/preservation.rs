use super::{z_score, Z_THRESHOLD};
use crate::error::Result;
use crate::gaussian::disk_mass;
use crate::group::GroupElement;
use crate::montecarlo::{combined_se, Engine, MeasureEstimate, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;

/// Compares independent estimates of `γ(A)` and `γ(g·A)`.
pub fn verify_measure_preservation(
    engine: &Engine,
    g: &GroupElement,
    set: &BorelSet,
    samples: usize,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    let moved = BorelSet::acted(g, set);
    let depth = moved.determination_level();
    let before = engine.estimate_measure(set, depth, samples, &stream.fork(1))?;
    let after = engine.estimate_measure(&moved, depth, samples, &stream.fork(2))?;
    let diff = after.estimate - before.estimate;

    let mut b = ReportBuilder::new("measure-preservation", stream.master_seed);
    b.param("samples", samples)
        .param("group_level", g.level())
        .param(
            "set",
            serde_json::from_str::<serde_json::Value>(&set.to_json()).expect("valid JSON"),
        )
        .observe("set_estimate", before.estimate)
        .observe("acted_estimate", after.estimate)
        .observe("difference_z", z_score(diff, combined_se(&before, &after)))
        .max("difference_z", Z_THRESHOLD);
    Ok(b.finish())
}

/// Minimum share of intervals that must cover the true value.
pub const MIN_COVERAGE: f64 = 0.9;

/// Estimates the centred disk of the given radius at level 0 `repetitions`
/// times and counts how often the Wilson interval covers its exact mass.
pub fn verify_coverage(
    engine: &Engine,
    radius: f64,
    repetitions: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    let set = BorelSet::disk(0, num_complex::Complex64::new(0.0, 0.0), radius)?;
    let truth = disk_mass(0.0, radius);
    let estimates = (0..repetitions)
        .map(|r| engine.estimate_measure(&set, 0, samples, &stream.fork(r as u64)))
        .collect::<Result<Vec<MeasureEstimate>>>()?;
    let covered = estimates
        .iter()
        .filter(|e| e.ci_low() <= truth && truth <= e.ci_high())
        .count();

    let mut b = ReportBuilder::new("wilson-coverage", stream.master_seed);
    b.param("radius", radius)
        .param("repetitions", repetitions)
        .param("samples", samples)
        .param("confidence", engine.confidence())
        .observe("true_measure", truth)
        .observe("covered", covered as f64)
        .observe("coverage", covered as f64 / repetitions as f64)
        .min("coverage", MIN_COVERAGE);
    Ok(b.finish())
}
