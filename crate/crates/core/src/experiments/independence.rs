use super::{z_score, Z_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::group::make_gsk;
use crate::montecarlo::{Engine, RngStream, TreeLaw};
use crate::report::{ExperimentReport, ReportBuilder};
use crate::sets::BorelSet;
use crate::tree::LevelVector;

pub const MAX_EVENTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceConfig {
    pub s: f64,
    /// Number of events `g_{s,k}·π_n^{-1}(K)`, `n ≤ k ≤ n + m - 1`.
    pub m: usize,
    /// Conditioning value; drawn from `γ_n` when absent.
    pub z: Option<LevelVector>,
    pub samples: usize,
    /// Negative control: use `g_{s,n}` for every event.
    pub repeat_first: bool,
}

/// Under `γ_z`, checks that the events `g_{s,k}·π_n^{-1}(K)` have marginal
/// measure `γ_n((√(1+s²)K - z)/s)` and that their joint cell frequencies
/// match the product of the marginals.
pub fn verify_conditional_independence(
    engine: &Engine,
    set: &BorelSet,
    cfg: &IndependenceConfig,
    stream: &RngStream,
) -> Result<ExperimentReport> {
    if !(1..=MAX_EVENTS).contains(&cfg.m) {
        return Err(invalid(format!("m must lie in 1..={MAX_EVENTS}, got {}", cfg.m)));
    }
    if cfg.s == 0.0 || !cfg.s.is_finite() {
        return Err(invalid("s must be finite and nonzero"));
    }
    let n = set.determination_level();
    let z = match &cfg.z {
        Some(z) if z.level() != n => {
            return Err(Error::LevelMismatch {
                expected: n,
                found: z.level(),
            })
        }
        Some(z) => z.clone(),
        None => LevelVector::sample(n, &mut stream.fork(0).rng())?,
    };

    let events = (0..cfg.m as u32)
        .map(|j| {
            let k = if cfg.repeat_first { n } else { n + j };
            Ok(BorelSet::acted(&make_gsk(cfg.s, k)?, set))
        })
        .collect::<Result<Vec<_>>>()?;
    let depth = n + cfg.m as u32;
    let table = engine.estimate_joint_under(
        &TreeLaw::Conditional(z.clone()),
        &events,
        depth,
        cfg.samples,
        &stream.fork(1),
    )?;

    // (√(1+s²)K - z)/s has the same γ_n-measure as its negation, so the
    // reference set can be written with a positive scale.
    let scale = (1.0 + cfg.s * cfg.s).sqrt() / cfg.s.abs();
    let reference = BorelSet::affine_image(set, scale, z.scale(-1.0 / cfg.s.abs()))?;
    let reference = engine.estimate_measure(&reference, n, cfg.samples, &stream.fork(2))?;

    let nsamp = table.samples as f64;
    let mut b = ReportBuilder::new("verify-independence", stream.master_seed);
    let mut max_marginal_z = 0.0f64;
    for i in 0..cfg.m {
        let p = table.marginal(i);
        let se = (p * (1.0 - p) / nsamp).hypot(reference.se());
        max_marginal_z = max_marginal_z.max(z_score(p - reference.estimate, se));
        b.observe(&format!("marginal_{i}"), p);
    }
    let mut max_cell_z = 0.0f64;
    for (cell, (obs, want)) in table
        .probabilities()
        .iter()
        .zip(table.product_of_marginals())
        .enumerate()
    {
        max_cell_z = max_cell_z.max(z_score(obs - want, (want * (1.0 - want) / nsamp).sqrt()));
        b.observe(&format!("cell_{cell}"), *obs);
    }

    b.param("s", cfg.s)
        .param("m", cfg.m)
        .param("n", n)
        .param("samples", cfg.samples)
        .param("z", serde_json::to_value(&z).expect("level vectors serialize"))
        .param("repeat_first", cfg.repeat_first)
        .param(
            "set",
            serde_json::from_str::<serde_json::Value>(&set.to_json()).expect("valid JSON"),
        )
        .observe("reference_marginal", reference.estimate)
        .observe("max_marginal_z", max_marginal_z)
        .observe("max_cell_z", max_cell_z)
        .max("max_marginal_z", Z_THRESHOLD)
        .max("max_cell_z", Z_THRESHOLD);
    Ok(b.finish())
}
