//! Acceptance battery. Each test runs one criterion at full size with the
//! fixed seed and prints a single PASS/FAIL line.

use whirly_core::suite::{run_criterion, CriterionOutcome, Scale, DEFAULT_SEED};
use whirly_core::Engine;

fn run(id: u32) -> CriterionOutcome {
    let engine = Engine::new(0).expect("engine");
    let outcome = run_criterion(&engine, id, DEFAULT_SEED, Scale::Full).expect("criterion runs");
    println!("{}", outcome.summary());
    for r in outcome.reports.iter().chain(&outcome.controls) {
        assert_eq!(
            r.pass,
            r.recompute_pass(),
            "{} pass flag disagrees with thresholds",
            r.name
        );
    }
    outcome
}

fn observed(outcome: &CriterionOutcome, report: &str, key: &str) -> Vec<f64> {
    outcome
        .reports
        .iter()
        .filter(|r| r.name == report)
        .map(|r| r.observed[key])
        .collect()
}

#[test]
fn criterion_01_exact_identities() {
    let o = run(1);
    assert_eq!(o.reports.len(), 12);
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_02_marginal_law() {
    let o = run(2);
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_03_measure_preservation() {
    let o = run(3);
    assert_eq!(o.reports.len(), 10);
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_04_convolution_identity() {
    let o = run(4);
    let exact = 1.0 - (-0.5f64).exp();
    assert!((exact - 0.39347).abs() < 1e-5);
    for est in observed(&o, "disk-anchor", "estimate") {
        assert!((est - exact).abs() <= 0.0025, "anchor {est} vs {exact}");
    }
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_05_conditional_independence() {
    let o = run(5);
    let exact = 1.0 - (-1.0f64).exp();
    assert!((exact - 0.63212).abs() < 1e-5);
    let se = (exact * (1.0 - exact) / 1e5).sqrt();
    for i in 0..3 {
        let p = observed(&o, "verify-independence", &format!("marginal_{i}"))[0];
        assert!((p - exact).abs() <= 3.0 * se, "marginal {i} = {p}");
    }
    assert!(o.controls.iter().all(|c| !c.pass), "repeated-event control passed");
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_06_continuity() {
    let o = run(6);
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_07_whirliness() {
    let o = run(7);
    let lower = observed(&o, "whirly-search", "best_union_lower")[0];
    assert!(lower > 0.5, "best lower bound {lower}");
    assert!(o.controls.iter().all(|c| !c.pass), "identity control passed");
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_08_positivity() {
    let o = run(8);
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_09_sharpness() {
    let o = run(9);
    let limits = observed(&o, "sharpness", "preimage_limit");
    assert!((limits[0] - 1.0).abs() < 1e-12);
    assert!((limits[1] - 0.5f64.sqrt()).abs() < 1e-12);
    for mean in observed(&o, "sharpness", "mean_preimage_rms").iter().zip(&limits) {
        assert!((mean.0 - mean.1).abs() <= 0.01);
    }
    assert!(o.pass, "{}", o.summary());
}

#[test]
fn criterion_10_reproducibility_and_calibration() {
    let o = run(10);
    let covered = observed(&o, "wilson-coverage", "covered")[0];
    assert!(covered >= 180.0, "coverage {covered}/200");
    assert!(o.pass, "{}", o.summary());
}
