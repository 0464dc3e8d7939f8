use num_complex::Complex64 as C;
use whirly_core::experiments::{
    positivity_scan, sharpness_check, verify_action_identity, verify_conditional_independence, verify_continuity,
    verify_convolution, verify_marginals, whirly_search, ContinuityConfig, DeltaRule, IndependenceConfig, PairMode,
    PositivityConfig, SharpnessConfig, WhirlyConfig, WhirlyMode,
};
use whirly_core::tree::Recursion;
use whirly_core::{BorelSet, Engine, Error, LevelVector, RngStream};

fn engine() -> Engine {
    Engine::new(0).unwrap()
}

fn unit_disk() -> BorelSet {
    BorelSet::disk(0, C::new(0.0, 0.0), 1.0).unwrap()
}

fn consistent(r: &whirly_core::ExperimentReport) {
    assert_eq!(r.pass, r.recompute_pass());
    assert!(!r.thresholds.is_empty());
}

#[test]
fn exact_sampler_passes_and_unnormalized_sampler_fails_marginals() {
    let e = engine();
    let good = verify_marginals(&e, 2, 50_000, &RngStream::new(1), Recursion::Exact).unwrap();
    consistent(&good);
    assert!(good.pass, "{:?}", good.failures());
    let bad = verify_marginals(&e, 2, 50_000, &RngStream::new(1), Recursion::Unnormalized).unwrap();
    consistent(&bad);
    assert!(!bad.pass);
    assert!(bad.failures().iter().any(|f| f.contains("second_moment")));
}

#[test]
fn action_identity_holds_on_a_grid() {
    for (n, k, s) in [(0, 0, 1.0), (1, 3, -0.5), (2, 5, 3.0), (3, 3, 0.0)] {
        let r = verify_action_identity(n, k, s, 100, &RngStream::new(2)).unwrap();
        assert!(r.pass, "{n} {k} {s}: {:?}", r.observed);
    }
    assert!(verify_action_identity(3, 2, 1.0, 10, &RngStream::new(2)).is_err());
}

#[test]
fn convolution_identity_passes_for_several_scales() {
    let e = engine();
    for (j, a) in [0.0, -1.0, 2.0].into_iter().enumerate() {
        let r = verify_convolution(&e, &unit_disk(), a, 100_000, &RngStream::new(3 + j as u64)).unwrap();
        consistent(&r);
        assert!(r.pass, "a = {a}: {:?}", r.observed);
    }
    assert!(matches!(
        verify_convolution(&e, &unit_disk(), 1.0, 100, &RngStream::new(3)),
        Err(Error::InsufficientSamples { .. })
    ));
}

#[test]
fn repeated_events_fail_the_product_test() {
    let e = engine();
    let mut cfg = IndependenceConfig {
        s: 1.0,
        m: 3,
        z: Some(LevelVector::zeros(0).unwrap()),
        samples: 50_000,
        repeat_first: false,
    };
    let good = verify_conditional_independence(&e, &unit_disk(), &cfg, &RngStream::new(4)).unwrap();
    assert!(good.pass, "{:?}", good.failures());
    cfg.repeat_first = true;
    let bad = verify_conditional_independence(&e, &unit_disk(), &cfg, &RngStream::new(4)).unwrap();
    assert!(!bad.pass);
    assert!(bad.failures().iter().any(|f| f.contains("cell")));
    cfg.m = 7;
    assert!(verify_conditional_independence(&e, &unit_disk(), &cfg, &RngStream::new(4)).is_err());
}

#[test]
fn continuity_separates_close_and_far_pairs() {
    let e = engine();
    let close = verify_continuity(&e, &ContinuityConfig::new(1.0, 0.1, 4, 20_000), &RngStream::new(5)).unwrap();
    assert!(close.pass, "{:?}", close.observed);
    assert!(close.observed["max_pair_distance"] < close.observed["delta"]);

    let mut far = ContinuityConfig::new(1.0, 0.1, 4, 20_000);
    far.center = C::new(1.5, 0.0);
    far.pairs = 1;
    far.mode = PairMode::Constant {
        g_angle: 0.0,
        h_angle: std::f64::consts::PI,
    };
    let far = verify_continuity(&e, &far, &RngStream::new(5)).unwrap();
    assert!(!far.pass);
    assert!(far.observed["max_symmetric_difference"] > 0.3);
}

#[test]
fn identity_translates_never_cover() {
    let e = engine();
    let mut cfg = WhirlyConfig::new(0.5, 20_000, 5);
    let found = whirly_search(&e, &unit_disk(), &cfg, &RngStream::new(6)).unwrap();
    assert!(found.pass);
    assert!(found.observed["union_estimate"] > 0.5);
    cfg.mode = WhirlyMode::Identity;
    let control = whirly_search(&e, &unit_disk(), &cfg, &RngStream::new(6)).unwrap();
    assert!(!control.pass);
    assert!(control.observed["best_union_lower"] < 0.45);
}

#[test]
fn null_sets_are_rejected_before_scanning() {
    let tiny = BorelSet::disk(0, C::new(0.0, 0.0), 1e-6).unwrap();
    let cfg = PositivityConfig {
        a: -2.0,
        z_samples: 5,
        inner_samples: 1_000,
        epsilon: None,
    };
    assert!(matches!(
        positivity_scan(&engine(), &tiny, &cfg, &RngStream::new(7)),
        Err(Error::NullSet)
    ));
}

#[test]
fn positivity_scan_reports_quantiles() {
    let cfg = PositivityConfig {
        a: -2.0,
        z_samples: 50,
        inner_samples: 5_000,
        epsilon: Some(0.5),
    };
    let r = positivity_scan(&engine(), &unit_disk(), &cfg, &RngStream::new(8)).unwrap();
    consistent(&r);
    let q = |k: &str| r.observed[k];
    assert!(q("translate_q01") <= q("translate_q10") && q("translate_q10") <= q("translate_q50"));
    assert!(r.observed.contains_key("delta_at_epsilon"));
}

#[test]
fn sharpness_limits_follow_the_coefficients() {
    let e = engine();
    let r = sharpness_check(&e, &SharpnessConfig::new(2.0, 1.0, 5_000, 20), &RngStream::new(9)).unwrap();
    assert!(r.pass, "{:?}", r.failures());
    assert!((r.observed["preimage_limit"] - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((r.observed["combination_limit"] - 5f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.parameters["a_squared_equals_b_squared_plus_one"], false);
    let r = sharpness_check(
        &e,
        &SharpnessConfig::new(2f64.sqrt(), 1.0, 5_000, 20),
        &RngStream::new(9),
    )
    .unwrap();
    assert_eq!(r.parameters["a_squared_equals_b_squared_plus_one"], true);
    assert!(sharpness_check(&e, &SharpnessConfig::new(1.0, 1.0, 10, 20), &RngStream::new(9)).is_err());
}

#[test]
fn both_delta_rules_keep_pairs_close() {
    let e = engine();
    let mut deltas = Vec::new();
    for rule in [DeltaRule::Conservative, DeltaRule::Original] {
        let mut cfg = ContinuityConfig::new(1.0, 0.1, 5, 20_000);
        cfg.rule = rule;
        let r = verify_continuity(&e, &cfg, &RngStream::new(10)).unwrap();
        assert!(r.pass, "{rule:?}: {:?}", r.failures());
        deltas.push(r.observed["delta"]);
    }
    assert!((deltas[1] / deltas[0] - 2f64.sqrt()).abs() < 1e-12);
}
