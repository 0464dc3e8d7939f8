use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Draw tree samples and print their leaves.
    Sample,
    /// Estimate the Gaussian measure of a set.
    Estimate,
    /// Check the joint law of node values and U-statistics.
    VerifyMarginals,
    /// Check the projected action identity on random trees.
    VerifyActionIdentity,
    /// Check that nearby group elements move a disk by little.
    VerifyContinuity,
    /// Compare direct and Fubini estimates of the convolution identity.
    VerifyConvolve,
    /// Check conditional independence of whirled events.
    VerifyIndependence,
    /// Scan translate measures for positivity.
    PositivityScan,
    /// Search for a covering union of whirled translates.
    WhirlySearch,
    /// High-dimensional concentration check.
    Sharpness,
    /// Run the full acceptance battery.
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Estimate => "estimate",
            Command::VerifyMarginals => "verify-marginals",
            Command::VerifyActionIdentity => "verify-action-identity",
            Command::VerifyContinuity => "verify-continuity",
            Command::VerifyConvolve => "verify-convolve",
            Command::VerifyIndependence => "verify-independence",
            Command::PositivityScan => "positivity-scan",
            Command::WhirlySearch => "whirly-search",
            Command::Sharpness => "sharpness",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Which `δ` the continuity check derives from the annulus width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaRuleArg {
    /// `δ = s·√(ε/6)`.
    #[default]
    Conservative,
    /// `δ = s·√(ε/3)`.
    Original,
}

/// One run, as given by flags or a JSON file. Every field is optional here;
/// [`crate::dispatch::plan`] fills defaults and range-checks everything
/// before any sampling happens.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Master seed [default: 20261016].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, env = "WHIRLY_SEED")]
    pub seed: Option<u64>,
    /// Sample count; trials, inner samples or repetitions for some commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Tree depth for `sample` and `estimate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub depth: Option<u32>,
    /// Set: `disk:levelN:rR[:cX,Y]`, inline JSON, or `@path` to a JSON file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub set: Option<String>,
    /// Tolerance for continuity, whirliness and positivity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Whirling parameter `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Translate scale `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Sharpness coefficient `b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Level `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub n: Option<u32>,
    /// Level `k ≥ n` of the whirling element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub k: Option<u32>,
    /// Number of whirled events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub m: Option<usize>,
    /// Dimension for `sharpness`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub dims: Option<usize>,
    /// Largest `n + m` scanned by `whirly-search`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Number of conditioning draws for `positivity-scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub z_samples: Option<usize>,
    /// Continuity `δ` rule [default: conservative].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, value_enum)]
    pub delta_rule: Option<DeltaRuleArg>,
    /// Worker threads, 0 for all cores; never changes results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format [default: json].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Zero `runtime_ms` so identical configs give identical bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_timing: Option<bool>,
    /// Run `suite` at 1/100 of the sample sizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub smoke: Option<bool>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        RunConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        overlay!(
            self, base, command, seed, samples, depth, set, epsilon, s, a, b, n, k, m, dims, max_depth, z_samples,
            delta_rule, workers, output, format, no_timing, smoke
        )
    }
}

pub const MAX_SAMPLES: usize = 100_000_000;
pub const MAX_WORKERS: usize = 256;

pub(crate) fn check_finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite, got {v}")))
    }
}

pub(crate) fn check_range<T: PartialOrd + std::fmt::Display + Copy>(
    name: &str,
    v: T,
    lo: T,
    hi: T,
) -> Result<T, CliError> {
    if v < lo || v > hi {
        Err(usage(format!("--{name} must lie in {lo}..={hi}, got {v}")))
    } else {
        Ok(v)
    }
}

pub(crate) fn required<T>(name: &str, v: Option<T>, command: Command) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("{} requires --{name}", command.name())))
}
