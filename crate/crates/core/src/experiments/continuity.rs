use num_complex::Complex64;
use rand::Rng as _;

use super::Z_THRESHOLD;
use crate::error::{invalid, Result};
use crate::gaussian::annulus_mass;
use crate::group::{uniform_distance, GroupElement};
use crate::montecarlo::{Engine, RngStream};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;

pub const MAX_LEVEL: u32 = 10;

/// How the closeness bound `δ` is derived from the annulus width `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaRule {
    /// `δ = s·√(ε/6)`. Under the crate's convention the difference variable
    /// has `E|D|² ≤ 2δ²`, so Chebyshev needs the extra factor `√2`.
    #[default]
    Conservative,
    /// `δ = s·√(ε/3)`.
    Original,
}

impl DeltaRule {
    fn divisor(self) -> f64 {
        match self {
            DeltaRule::Conservative => 6.0,
            DeltaRule::Original => 3.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            DeltaRule::Conservative => "s*sqrt(eps/6)",
            DeltaRule::Original => "s*sqrt(eps/3)",
        }
    }
}

/// Which pairs `(g, h)` are compared.
#[derive(Debug, Clone, PartialEq)]
pub enum PairMode {
    /// `g` uniformly random in `S_n`, `h = g·e^{iθ}` with every `|e^{iθ_σ} - 1| < δ`.
    WithinDelta,
    /// Constant phases `g = e^{i·g_angle}`, `h = e^{i·h_angle}`; a negative
    /// control when the two are far apart.
    Constant { g_angle: f64, h_angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityConfig {
    pub radius: f64,
    pub center: Complex64,
    pub epsilon: f64,
    pub n: u32,
    pub pairs: usize,
    pub samples: usize,
    pub rule: DeltaRule,
    pub mode: PairMode,
}

impl ContinuityConfig {
    pub fn new(radius: f64, epsilon: f64, n: u32, samples: usize) -> Self {
        ContinuityConfig {
            radius,
            center: Complex64::new(0.0, 0.0),
            epsilon,
            n,
            pairs: 20,
            samples,
            rule: DeltaRule::default(),
            mode: PairMode::WithinDelta,
        }
    }
}

/// The annulus half-width `s` with `γ(N_{r+s}(c) \ N_{r-s}(c)) < ε/3`, found
/// by bisection, and the resulting `δ`.
pub fn continuity_constants(radius: f64, center_abs: f64, epsilon: f64, rule: DeltaRule) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "no valid annulus width: epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() || !center_abs.is_finite() {
        return Err(invalid("disk radius must be positive and finite"));
    }
    let target = epsilon / 3.0;
    let mass = |s: f64| annulus_mass(center_abs, radius, s);
    let mut hi = radius;
    while mass(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid("no valid annulus width found"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(lo > 0.0) {
        return Err(invalid("no valid annulus width found"));
    }
    Ok((lo, lo * (epsilon / rule.divisor()).sqrt()))
}

/// For `W` a disk and pairs `g, h ∈ S_n` within `δ` of each other, checks
/// that `γ_n((g·π^{-1}W) Δ (h·π^{-1}W)) < ε` with three standard errors to
/// spare.
pub fn verify_continuity(engine: &Engine, cfg: &ContinuityConfig, stream: &RngStream) -> Result<ExperimentReport> {
    if cfg.n > MAX_LEVEL {
        return Err(invalid(format!("continuity check limited to n ≤ {MAX_LEVEL}")));
    }
    if cfg.pairs == 0 {
        return Err(invalid("need at least one pair"));
    }
    let (s, delta) = continuity_constants(cfg.radius, cfg.center.norm(), cfg.epsilon, cfg.rule)?;
    let w = BorelSet::disk(0, cfg.center, cfg.radius)?;
    let theta_max = 2.0 * (delta / 2.0).asin() * (1.0 - 1e-9);

    let mut max_upper = 0.0f64;
    let mut max_estimate = 0.0f64;
    let mut max_distance = 0.0f64;
    for j in 0..cfg.pairs {
        let (g, h) = match cfg.mode {
            PairMode::WithinDelta => {
                let mut rng = stream.fork(j as u64).rng();
                let g = GroupElement::random(cfg.n, &mut rng)?;
                let angles: Vec<f64> = (0..1usize << cfg.n)
                    .map(|_| rng.random_range(-theta_max..theta_max))
                    .collect();
                let h = g.compose(&GroupElement::from_angles(cfg.n, &angles)?)?;
                (g, h)
            }
            PairMode::Constant { g_angle, h_angle } => (
                GroupElement::constant(cfg.n, g_angle)?,
                GroupElement::constant(cfg.n, h_angle)?,
            ),
        };
        max_distance = max_distance.max(uniform_distance(&g, &h));
        let diff = BorelSet::symmetric_difference(&BorelSet::acted(&g, &w), &BorelSet::acted(&h, &w));
        let est = engine.estimate_measure(&diff, cfg.n, cfg.samples, &stream.fork(1_000_000 + j as u64))?;
        max_estimate = max_estimate.max(est.estimate);
        max_upper = max_upper.max(est.estimate + Z_THRESHOLD * est.se());
    }

    let mut b = ReportBuilder::new("verify-continuity", stream.master_seed);
    b.param("radius", cfg.radius)
        .param("center", vec![cfg.center.re, cfg.center.im])
        .param("epsilon", cfg.epsilon)
        .param("n", cfg.n)
        .param("pairs", cfg.pairs)
        .param("samples", cfg.samples)
        .param("delta_rule", cfg.rule.name())
        .param(
            "pair_mode",
            match cfg.mode {
                PairMode::WithinDelta => "within-delta".to_owned(),
                PairMode::Constant { g_angle, h_angle } => format!("constant({g_angle}, {h_angle})"),
            },
        )
        .observe("annulus_width", s)
        .observe("annulus_mass", annulus_mass(cfg.center.norm(), cfg.radius, s))
        .observe("delta", delta)
        .observe("max_pair_distance", max_distance)
        .observe("max_symmetric_difference", max_estimate)
        .observe("max_symmetric_difference_upper", max_upper)
        .lt("max_symmetric_difference_upper", cfg.epsilon);
    if cfg.mode == PairMode::WithinDelta {
        b.lt("max_pair_distance", delta);
    }
    Ok(b.finish())
}
