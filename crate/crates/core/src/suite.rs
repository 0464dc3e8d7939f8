//! The acceptance battery: ten criteria, each a bundle of reports plus the
//! rule that turns them into a single pass/fail verdict.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng as _;
use serde::Serialize;

use crate::error::Result;
use crate::experiments::{
    positivity_scan, sharpness_check, verify_conditional_independence, verify_continuity, verify_convolution,
    verify_coverage, verify_marginals, verify_measure_preservation, whirly_search, ContinuityConfig,
    IndependenceConfig, PositivityConfig, SharpnessConfig, WhirlyConfig, WhirlyMode, Z_THRESHOLD,
};
use crate::gaussian::disk_mass;
use crate::group::{action_identity_residual, GroupElement};
use crate::montecarlo::{Engine, RngStream};
use crate::path::DyadicPath;
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;
use crate::tree::{phi_roundtrip, sample_tree, LevelVector, Recursion};

pub const DEFAULT_SEED: u64 = 20_261_016;
pub const CRITERIA: std::ops::RangeInclusive<u32> = 1..=10;

/// Wall-clock budget for the whirliness search, in milliseconds.
pub const WHIRLY_BUDGET_MS: u64 = 5 * 60 * 1000;

/// `Full` runs every criterion at its stated size; `Smoke` divides sample
/// counts by 100 for a fast structural run whose verdicts carry no weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Full,
    Smoke,
}

impl Scale {
    fn samples(self, full: usize, floor: usize) -> usize {
        match self {
            Scale::Full => full,
            Scale::Smoke => (full / 100).max(floor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub pass: bool,
    /// Reports that must fail for the criterion to pass.
    pub controls: Vec<ExperimentReport>,
    pub reports: Vec<ExperimentReport>,
}

impl CriterionOutcome {
    fn new(id: u32, reports: Vec<ExperimentReport>, controls: Vec<ExperimentReport>) -> Self {
        let pass = reports.iter().all(|r| r.pass) && controls.iter().all(|r| !r.pass);
        CriterionOutcome {
            id,
            title: title(id),
            pass,
            controls,
            reports,
        }
    }

    /// One line: verdict, id, title and the failing thresholds if any.
    pub fn summary(&self) -> String {
        let mut line = format!(
            "{} criterion {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title
        );
        let failed: Vec<String> = self
            .reports
            .iter()
            .flat_map(|r| r.failures().into_iter().map(move |f| format!("{}[{f}]", r.name)))
            .chain(
                self.controls
                    .iter()
                    .filter(|r| r.pass)
                    .map(|r| format!("{}[control passed]", r.name)),
            )
            .collect();
        if !failed.is_empty() {
            line.push_str(" (");
            line.push_str(&failed.join(", "));
            line.push(')');
        }
        line
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "exact identities",
        2 => "marginal law",
        3 => "measure preservation",
        4 => "convolution identity",
        5 => "conditional independence",
        6 => "continuity",
        7 => "whirliness",
        8 => "positivity",
        9 => "sharpness",
        10 => "reproducibility and calibration",
        _ => "unknown",
    }
}

fn unit_disk() -> Result<BorelSet> {
    BorelSet::disk(0, Complex64::new(0.0, 0.0), 1.0)
}

/// Runs criterion `id` on the stream `seed` forked by `id`.
pub fn run_criterion(engine: &Engine, id: u32, seed: u64, scale: Scale) -> Result<CriterionOutcome> {
    let stream = RngStream::new(seed).fork(id as u64);
    match id {
        1 => exact_identities(&stream, scale),
        2 => marginal_law(engine, &stream, scale),
        3 => measure_preservation(engine, &stream, scale),
        4 => convolution(engine, &stream, scale),
        5 => conditional_independence(engine, &stream, scale),
        6 => continuity(engine, &stream, scale),
        7 => whirliness(engine, &stream, scale),
        8 => positivity(engine, &stream, scale),
        9 => sharpness(engine, &stream, scale),
        10 => reproducibility(engine, &stream, scale),
        _ => Err(crate::error::invalid(format!("criteria are numbered 1..=10, got {id}"))),
    }
}

pub fn run_all(engine: &Engine, seed: u64, scale: Scale) -> Result<Vec<CriterionOutcome>> {
    CRITERIA.map(|id| run_criterion(engine, id, seed, scale)).collect()
}

const EXACT_TOL: f64 = 1e-10;
const S_GRID: [f64; 7] = [0.0, 0.5, -0.5, 1.0, -1.0, 3.0, -3.0];

fn exact_identities(stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let trees = scale.samples(1_000, 10);
    let mut reports = Vec::new();
    for n in 0..=2u32 {
        for k in n..=n + 3 {
            let depth = k + 2;
            let mut rng = stream.fork(((n as u64) << 8) | k as u64).rng();
            let (mut constraint, mut roundtrip, mut recursion, mut action) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..trees {
                let y = sample_tree(depth, &mut rng)?;
                for level in 0..depth {
                    let parents = y.level_values(level);
                    let children = y.level_values(level + 1);
                    for (i, p) in parents.iter().enumerate() {
                        let avg = (children[2 * i] + children[2 * i + 1]) / SQRT_2;
                        constraint = constraint.max((p - avg).norm());
                    }
                }
                roundtrip = roundtrip.max(phi_roundtrip(&y));
                if k > n {
                    for sigma in DyadicPath::all(n) {
                        let whole = y.u_stat(&sigma, k)?;
                        let halves = (y.u_stat(&sigma.child(0), k)? + y.u_stat(&sigma.child(1), k)?) / SQRT_2;
                        recursion = recursion.max((whole - halves).norm());
                    }
                }
                for s in S_GRID {
                    action = action.max(action_identity_residual(&y, n, k, s)?);
                }
            }
            let mut b = ReportBuilder::new("exact-identities", stream.master_seed);
            b.param("n", n)
                .param("k", k)
                .param("depth", depth)
                .param("trees", trees)
                .param("s_grid", S_GRID.to_vec())
                .observe("max_constraint_residual", constraint)
                .observe("max_roundtrip_residual", roundtrip)
                .observe("max_recursion_residual", recursion)
                .observe("max_action_residual", action)
                .max("max_constraint_residual", EXACT_TOL)
                .max("max_roundtrip_residual", EXACT_TOL)
                .max("max_recursion_residual", EXACT_TOL)
                .max("max_action_residual", EXACT_TOL);
            reports.push(b.finish());
        }
    }
    Ok(CriterionOutcome::new(1, reports, vec![]))
}

fn marginal_law(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(100_000, 1_000);
    let exact = verify_marginals(engine, 3, samples, &stream.fork(0), Recursion::Exact)?;
    let broken = verify_marginals(engine, 3, samples, &stream.fork(1), Recursion::Unnormalized)?;
    Ok(CriterionOutcome::new(2, vec![exact], vec![broken]))
}

fn random_disk_product(rng: &mut impl rand::Rng) -> Result<BorelSet> {
    let level = rng.random_range(0..=2u32);
    let centers = LevelVector::sample(level, rng)?.scale(0.5);
    let radii = (0..1usize << level).map(|_| rng.random_range(1.0..2.5)).collect();
    BorelSet::disk_product(centers, radii)
}

fn measure_preservation(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(100_000, 1_000);
    let mut rng = stream.fork(0).rng();
    let mut reports = Vec::new();
    for j in 0..10u64 {
        let g = GroupElement::random(rng.random_range(1..=4u32), &mut rng)?;
        let set = random_disk_product(&mut rng)?;
        reports.push(verify_measure_preservation(
            engine,
            &g,
            &set,
            samples,
            &stream.fork(1 + j),
        )?);
    }
    Ok(CriterionOutcome::new(3, reports, vec![]))
}

/// Distance allowed between the estimated and exact unit-disk mass.
const ANCHOR_TOL: f64 = 0.0025;

fn convolution(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(1_000_000, 10_000);
    let k = unit_disk()?;
    let mut reports = Vec::new();
    for (j, a) in [0.0, 1.0, -1.0, 2.0, -2.0].into_iter().enumerate() {
        reports.push(verify_convolution(engine, &k, a, samples, &stream.fork(j as u64))?);
    }
    let est = engine.estimate_measure(&k, 0, samples, &stream.fork(100))?;
    let exact = disk_mass(0.0, 1.0);
    let mut b = ReportBuilder::new("disk-anchor", stream.master_seed);
    b.param("samples", samples)
        .observe("exact", exact)
        .observe("estimate", est.estimate)
        .observe("abs_error", (est.estimate - exact).abs())
        .max("abs_error", ANCHOR_TOL);
    reports.push(b.finish());
    Ok(CriterionOutcome::new(4, reports, vec![]))
}

fn conditional_independence(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(100_000, 1_000);
    let k = unit_disk()?;
    let mut cfg = IndependenceConfig {
        s: 1.0,
        m: 3,
        z: Some(LevelVector::zeros(0)?),
        samples,
        repeat_first: false,
    };
    let main = verify_conditional_independence(engine, &k, &cfg, &stream.fork(0))?;

    // With z = 0 and s = 1 each event has the mass of the disk of radius √2.
    let exact = disk_mass(0.0, SQRT_2);
    let se = (exact * (1.0 - exact) / samples as f64).sqrt();
    let mut b = ReportBuilder::new("marginal-anchor", stream.master_seed);
    b.param("samples", samples).observe("exact", exact);
    let mut worst = 0.0f64;
    for i in 0..cfg.m {
        let p = main.observed[&format!("marginal_{i}")];
        worst = worst.max((p - exact).abs() / se);
    }
    b.observe("max_anchor_z", worst).max("max_anchor_z", Z_THRESHOLD);
    let anchor = b.finish();

    cfg.repeat_first = true;
    let control = verify_conditional_independence(engine, &k, &cfg, &stream.fork(1))?;
    Ok(CriterionOutcome::new(5, vec![main, anchor], vec![control]))
}

fn continuity(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(100_000, 1_000);
    let cfg = ContinuityConfig::new(1.0, 0.1, 6, samples);
    let main = verify_continuity(engine, &cfg, &stream.fork(0))?;
    // An off-centre disk rotated by π moves about 0.44 of its mass.
    let mut control = ContinuityConfig::new(1.0, 0.1, 6, samples);
    control.center = Complex64::new(1.5, 0.0);
    control.pairs = 1;
    control.mode = crate::experiments::PairMode::Constant {
        g_angle: 0.0,
        h_angle: std::f64::consts::PI,
    };
    let control = verify_continuity(engine, &control, &stream.fork(1))?;
    Ok(CriterionOutcome::new(6, vec![main], vec![control]))
}

fn whirliness(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let k = unit_disk()?;
    let samples = scale.samples(200_000, 2_000);
    let cfg = WhirlyConfig::new(0.5, samples, 12);
    let start = Instant::now();
    let main = whirly_search(engine, &k, &cfg, &stream.fork(0))?;
    let elapsed = start.elapsed().as_millis() as u64;
    let mut b = ReportBuilder::new("whirly-runtime", stream.master_seed);
    b.param("budget_ms", WHIRLY_BUDGET_MS)
        .observe("elapsed_ms", elapsed as f64)
        .lt("elapsed_ms", WHIRLY_BUDGET_MS as f64);
    let timing = b.finish();

    let mut control = WhirlyConfig::new(0.5, scale.samples(20_000, 1_000), 12);
    control.mode = WhirlyMode::Identity;
    let control = whirly_search(engine, &k, &control, &stream.fork(1))?;
    Ok(CriterionOutcome::new(7, vec![main, timing], vec![control]))
}

fn positivity(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let cfg = PositivityConfig {
        a: -2.0,
        z_samples: 200,
        inner_samples: scale.samples(10_000, 100),
        epsilon: None,
    };
    let report = positivity_scan(engine, &unit_disk()?, &cfg, stream)?;
    Ok(CriterionOutcome::new(8, vec![report], vec![]))
}

fn sharpness(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let reps = scale.samples(200, 5);
    let reports = [(SQRT_2, 1.0), (2.0, 1.0)]
        .into_iter()
        .enumerate()
        .map(|(j, (a, b))| {
            sharpness_check(
                engine,
                &SharpnessConfig::new(a, b, 10_000, reps),
                &stream.fork(j as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriterionOutcome::new(9, reports, vec![]))
}

/// Reports exercised by the reproducibility check, run on `engine`.
pub fn reproducibility_probe(engine: &Engine, stream: &RngStream, samples: usize) -> Result<Vec<ExperimentReport>> {
    let k = unit_disk()?;
    Ok(vec![
        engine.estimate_measure(&k, 0, samples, &stream.fork(0)).map(|e| {
            let mut b = ReportBuilder::new("estimate", stream.master_seed);
            b.observe("estimate", e.estimate).observe("hits", e.hits as f64);
            b.finish()
        })?,
        verify_convolution(engine, &k, 1.0, samples.max(10_000), &stream.fork(1))?,
        verify_marginals(engine, 2, samples, &stream.fork(2), Recursion::Exact)?,
        verify_conditional_independence(
            engine,
            &k,
            &IndependenceConfig {
                s: 1.0,
                m: 2,
                z: None,
                samples,
                repeat_first: false,
            },
            &stream.fork(3),
        )?,
    ])
}

fn reproducibility(engine: &Engine, stream: &RngStream, scale: Scale) -> Result<CriterionOutcome> {
    let samples = scale.samples(50_000, 1_000);
    let probe = stream.fork(0);
    let one = reproducibility_probe(&Engine::new(1)?, &probe, samples)?;
    let four = reproducibility_probe(&Engine::new(4)?, &probe, samples)?;
    let mismatches = one
        .iter()
        .zip(&four)
        .filter(|(a, b)| a.canonical_json() != b.canonical_json())
        .count();
    let mut b = ReportBuilder::new("worker-reproducibility", stream.master_seed);
    b.param("workers", vec![1, 4])
        .param("reports", one.len())
        .observe("mismatches", mismatches as f64)
        .max("mismatches", 0.0);
    let repro = b.finish();
    let coverage = verify_coverage(engine, 1.0, 200, scale.samples(2_000, 200), &stream.fork(1))?;
    Ok(CriterionOutcome::new(10, vec![repro, coverage], vec![]))
}
