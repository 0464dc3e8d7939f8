use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use whirly_core::experiments::{
    positivity_scan, sharpness_check, verify_action_identity, verify_conditional_independence, verify_continuity,
    verify_convolution, verify_marginals, whirly_search, ContinuityConfig, DeltaRule, IndependenceConfig,
    PositivityConfig, SharpnessConfig, WhirlyConfig,
};
use whirly_core::montecarlo::MIN_SAMPLES;
use whirly_core::sets::SetSpec;
use whirly_core::suite::{self, CriterionOutcome, Scale};
use whirly_core::tree::{Recursion, MAX_DEPTH};
use whirly_core::{sample_tree, BorelSet, Engine, ExperimentReport, ReportBuilder, RngStream};

use crate::config::{
    check_finite, check_range, required, Command, DeltaRuleArg, Format, RunConfig, MAX_SAMPLES, MAX_WORKERS,
};
use crate::error::{usage, CliError};
use crate::render;
use crate::set_input::parse_set;

pub const MAX_SAMPLE_DEPTH: u32 = 12;
pub const MAX_SAMPLE_TREES: usize = 10_000;
pub const MAX_SEARCH_DEPTH: u32 = 16;
pub const MAX_DIMS: usize = 10_000_000;

/// A validated job; building one performs every range check.
#[derive(Debug, Clone)]
pub enum Job {
    Sample { depth: u32, count: usize },
    Estimate { set: BorelSet, depth: u32, samples: usize },
    Marginals { n: u32, samples: usize },
    ActionIdentity { n: u32, k: u32, s: f64, trials: usize },
    Continuity(ContinuityConfig),
    Convolve { set: BorelSet, a: f64, samples: usize },
    Independence { set: BorelSet, cfg: IndependenceConfig },
    Positivity { set: BorelSet, cfg: PositivityConfig },
    Whirly { set: BorelSet, cfg: WhirlyConfig },
    Sharpness(SharpnessConfig),
    Suite { scale: Scale },
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub job: Job,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub no_timing: bool,
}

/// Which flags each command reads, beyond the common ones.
fn accepted(command: Command) -> &'static [&'static str] {
    match command {
        Command::Sample => &["samples", "depth"],
        Command::Estimate => &["samples", "depth", "set"],
        Command::VerifyMarginals => &["samples", "n"],
        Command::VerifyActionIdentity => &["samples", "n", "k", "s"],
        Command::VerifyContinuity => &["samples", "set", "epsilon", "n", "delta_rule"],
        Command::VerifyConvolve => &["samples", "set", "a"],
        Command::VerifyIndependence => &["samples", "set", "s", "m"],
        Command::PositivityScan => &["samples", "set", "a", "epsilon", "z_samples"],
        Command::WhirlySearch => &["samples", "set", "epsilon", "max_depth", "z_samples"],
        Command::Sharpness => &["samples", "a", "b", "dims"],
        Command::Suite => &["smoke"],
    }
}

fn given_fields(cfg: &RunConfig) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut mark = |name, set: bool| {
        if set {
            out.push(name)
        }
    };
    mark("samples", cfg.samples.is_some());
    mark("depth", cfg.depth.is_some());
    mark("set", cfg.set.is_some());
    mark("epsilon", cfg.epsilon.is_some());
    mark("s", cfg.s.is_some());
    mark("a", cfg.a.is_some());
    mark("b", cfg.b.is_some());
    mark("n", cfg.n.is_some());
    mark("k", cfg.k.is_some());
    mark("m", cfg.m.is_some());
    mark("dims", cfg.dims.is_some());
    mark("max_depth", cfg.max_depth.is_some());
    mark("z_samples", cfg.z_samples.is_some());
    mark("delta_rule", cfg.delta_rule.is_some());
    mark("smoke", cfg.smoke.is_some());
    out
}

fn samples(cfg: &RunConfig, default: usize, min: usize) -> Result<usize, CliError> {
    check_range("samples", cfg.samples.unwrap_or(default), min, MAX_SAMPLES)
}

fn set_arg(cfg: &RunConfig, command: Command) -> Result<BorelSet, CliError> {
    parse_set(&required("set", cfg.set.clone(), command)?)
}

fn epsilon(cfg: &RunConfig, command: Command) -> Result<f64, CliError> {
    let e = required("epsilon", cfg.epsilon, command)?;
    if e > 0.0 && e < 1.0 {
        Ok(e)
    } else {
        Err(usage(format!("--epsilon must lie in (0, 1), got {e}")))
    }
}

fn finite(name: &str, v: Option<f64>, command: Command) -> Result<f64, CliError> {
    check_finite(name, required(name, v, command)?)
}

/// Validates `cfg` and resolves defaults. No sampling happens here.
pub fn plan(cfg: &RunConfig) -> Result<Plan, CliError> {
    let command = cfg.command.ok_or_else(|| usage("no command given"))?;
    let allowed = accepted(command);
    if let Some(extra) = given_fields(cfg).into_iter().find(|f| !allowed.contains(f)) {
        return Err(usage(format!(
            "--{} is not used by {}",
            extra.replace('_', "-"),
            command.name()
        )));
    }
    let workers = check_range("workers", cfg.workers.unwrap_or(0), 0, MAX_WORKERS)?;

    let job = match command {
        Command::Sample => Job::Sample {
            depth: check_range("depth", cfg.depth.unwrap_or(3), 0, MAX_SAMPLE_DEPTH)?,
            count: check_range("samples", cfg.samples.unwrap_or(1), 1, MAX_SAMPLE_TREES)?,
        },
        Command::Estimate => {
            let set = set_arg(cfg, command)?;
            let level = set.determination_level();
            let depth = check_range("depth", cfg.depth.unwrap_or(level), level, MAX_DEPTH)?;
            Job::Estimate {
                set,
                depth,
                samples: samples(cfg, 100_000, MIN_SAMPLES)?,
            }
        }
        Command::VerifyMarginals => Job::Marginals {
            n: check_range("n", cfg.n.unwrap_or(3), 0, 8)?,
            samples: samples(cfg, 100_000, MIN_SAMPLES)?,
        },
        Command::VerifyActionIdentity => {
            let n = check_range("n", cfg.n.unwrap_or(0), 0, MAX_DEPTH - 2)?;
            let k = check_range("k", cfg.k.unwrap_or(n), n, MAX_DEPTH - 2)?;
            Job::ActionIdentity {
                n,
                k,
                s: check_finite("s", cfg.s.unwrap_or(1.0))?,
                trials: samples(cfg, 1_000, 1)?,
            }
        }
        Command::VerifyContinuity => {
            let eps = epsilon(cfg, command)?;
            let (center, radius) = match cfg.set.as_deref() {
                None => (num_complex::Complex64::new(0.0, 0.0), 1.0),
                Some(text) => single_disk(&parse_set(text)?)?,
            };
            let mut c = ContinuityConfig::new(radius, eps, check_range("n", cfg.n.unwrap_or(6), 0, 10)?, 0);
            c.center = center;
            c.rule = match cfg.delta_rule.unwrap_or_default() {
                DeltaRuleArg::Conservative => DeltaRule::Conservative,
                DeltaRuleArg::Original => DeltaRule::Original,
            };
            c.samples = samples(cfg, 100_000, MIN_SAMPLES)?;
            Job::Continuity(c)
        }
        Command::VerifyConvolve => Job::Convolve {
            set: set_arg(cfg, command)?,
            a: finite("a", cfg.a, command)?,
            samples: samples(cfg, 1_000_000, 10_000)?,
        },
        Command::VerifyIndependence => {
            let s = finite("s", cfg.s, command)?;
            if s == 0.0 {
                return Err(usage("--s must be nonzero"));
            }
            Job::Independence {
                set: set_arg(cfg, command)?,
                cfg: IndependenceConfig {
                    s,
                    m: check_range("m", cfg.m.unwrap_or(3), 1, 6)?,
                    z: None,
                    samples: samples(cfg, 100_000, MIN_SAMPLES)?,
                    repeat_first: false,
                },
            }
        }
        Command::PositivityScan => Job::Positivity {
            set: set_arg(cfg, command)?,
            cfg: PositivityConfig {
                a: finite("a", cfg.a, command)?,
                z_samples: check_range("z-samples", cfg.z_samples.unwrap_or(200), 1, 100_000)?,
                inner_samples: samples(cfg, 10_000, MIN_SAMPLES)?,
                epsilon: cfg.epsilon.map(|_| epsilon(cfg, command)).transpose()?,
            },
        },
        Command::WhirlySearch => {
            let eps = epsilon(cfg, command)?;
            let set = set_arg(cfg, command)?;
            let lo = set.determination_level() + 1;
            let max_depth = check_range("max-depth", cfg.max_depth.unwrap_or(12), lo, MAX_SEARCH_DEPTH)?;
            let mut w = WhirlyConfig::new(eps, samples(cfg, 200_000, MIN_SAMPLES)?, max_depth);
            w.z_samples = check_range("z-samples", cfg.z_samples.unwrap_or(w.z_samples), 1, 100_000)?;
            Job::Whirly { set, cfg: w }
        }
        Command::Sharpness => {
            let a = finite("a", cfg.a, command)?;
            if a == 0.0 {
                return Err(usage("--a must be nonzero"));
            }
            Job::Sharpness(SharpnessConfig::new(
                a,
                finite("b", cfg.b, command)?,
                check_range("dims", cfg.dims.unwrap_or(10_000), 1_000, MAX_DIMS)?,
                check_range("samples", cfg.samples.unwrap_or(200), 1, 100_000)?,
            ))
        }
        Command::Suite => Job::Suite {
            scale: if cfg.smoke.unwrap_or(false) {
                Scale::Smoke
            } else {
                Scale::Full
            },
        },
    };
    Ok(Plan {
        command,
        job,
        seed: cfg.seed.unwrap_or(suite::DEFAULT_SEED),
        workers,
        output: cfg.output.clone(),
        format: cfg.format.unwrap_or_default(),
        no_timing: cfg.no_timing.unwrap_or(false),
    })
}

/// Centre and radius of a single disk at level 0.
fn single_disk(set: &BorelSet) -> Result<(num_complex::Complex64, f64), CliError> {
    match set.to_spec() {
        SetSpec::DiskProduct {
            level: 0,
            centers,
            radii,
        } if radii.len() == 1 => Ok((num_complex::Complex64::new(centers[0][0], centers[0][1]), radii[0])),
        _ => Err(usage("verify-continuity needs a single disk at level 0")),
    }
}

/// What a run produced, before rendering.
#[derive(Debug, Clone)]
pub enum Product {
    Report(ExperimentReport),
    Suite {
        seed: u64,
        scale: Scale,
        outcomes: Vec<CriterionOutcome>,
    },
}

impl Product {
    pub fn pass(&self) -> bool {
        match self {
            Product::Report(r) => r.pass,
            Product::Suite { outcomes, .. } => outcomes.iter().all(|o| o.pass),
        }
    }

    fn zero_timing(&mut self) {
        match self {
            Product::Report(r) => r.runtime_ms = 0,
            Product::Suite { outcomes, .. } => {
                for o in outcomes {
                    for r in o.reports.iter_mut().chain(o.controls.iter_mut()) {
                        r.runtime_ms = 0;
                    }
                }
            }
        }
    }
}

fn set_value(set: &BorelSet) -> Value {
    serde_json::to_value(set.to_spec()).expect("set specs serialize")
}

pub fn execute(plan: &Plan) -> Result<Product, CliError> {
    let engine = Engine::new(plan.workers)?;
    let stream = RngStream::new(plan.seed);
    let mut product = match &plan.job {
        Job::Sample { depth, count } => {
            let mut rng = stream.rng();
            let mut trees = Vec::with_capacity(*count);
            let mut violations = 0usize;
            for _ in 0..*count {
                let t = sample_tree(*depth, &mut rng)?;
                violations += t.check_constraint().is_err() as usize;
                trees.push(json!(t.leaves().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()));
            }
            let mut b = ReportBuilder::new("sample", plan.seed);
            b.param("depth", *depth)
                .param("count", *count)
                .param("leaves", trees)
                .observe("constraint_violations", violations as f64)
                .max("constraint_violations", 0.0);
            Product::Report(b.finish())
        }
        Job::Estimate { set, depth, samples } => {
            let est = engine.estimate_measure(set, *depth, *samples, &stream)?;
            let mut b = ReportBuilder::new("estimate", plan.seed);
            b.param("set", set_value(set))
                .param("depth", *depth)
                .param("samples", *samples)
                .param("confidence", est.confidence)
                .observe("estimate", est.estimate)
                .observe("ci_low", est.ci_low())
                .observe("ci_high", est.ci_high())
                .observe("se", est.se())
                .observe("hits", est.hits as f64);
            Product::Report(b.finish())
        }
        Job::Marginals { n, samples } => {
            Product::Report(verify_marginals(&engine, *n, *samples, &stream, Recursion::Exact)?)
        }
        Job::ActionIdentity { n, k, s, trials } => {
            Product::Report(verify_action_identity(*n, *k, *s, *trials, &stream)?)
        }
        Job::Continuity(c) => Product::Report(verify_continuity(&engine, c, &stream)?),
        Job::Convolve { set, a, samples } => Product::Report(verify_convolution(&engine, set, *a, *samples, &stream)?),
        Job::Independence { set, cfg } => Product::Report(verify_conditional_independence(&engine, set, cfg, &stream)?),
        Job::Positivity { set, cfg } => Product::Report(positivity_scan(&engine, set, cfg, &stream)?),
        Job::Whirly { set, cfg } => Product::Report(whirly_search(&engine, set, cfg, &stream)?),
        Job::Sharpness(cfg) => Product::Report(sharpness_check(&engine, cfg, &stream)?),
        Job::Suite { scale } => Product::Suite {
            seed: plan.seed,
            scale: *scale,
            outcomes: suite::run_all(&engine, plan.seed, *scale)?,
        },
    };
    if plan.no_timing {
        product.zero_timing();
    }
    Ok(product)
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    pub fn failure(err: &CliError) -> Outcome {
        Outcome {
            exit_code: err.exit_code(),
            stdout: String::new(),
            stderr: format!("whirly-lab: {err}\n"),
        }
    }
}

/// Validates, runs and renders `cfg`: exit 0 on pass, 1 on a failed
/// verification, 2 on a usage or configuration error.
pub fn run(cfg: &RunConfig) -> Outcome {
    match try_run(cfg) {
        Ok(o) => o,
        Err(e) => Outcome::failure(&e),
    }
}

fn try_run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let plan = plan(cfg)?;
    let product = execute(&plan)?;
    let text = render::render(&product, plan.format)?;
    let exit_code = if product.pass() { 0 } else { 1 };
    let stdout = match &plan.output {
        Some(path) => {
            fs::write(path, &text)?;
            String::new()
        }
        None => text,
    };
    Ok(Outcome {
        exit_code,
        stdout,
        stderr: String::new(),
    })
}
