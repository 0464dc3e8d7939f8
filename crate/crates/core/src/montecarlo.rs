//! Seeded, sharded Monte Carlo estimation.
//!
//! Samples are partitioned by index into fixed blocks of [`BLOCK_SIZE`].
//! Block `i` of a stream draws from ChaCha8 keyed by `(master_seed,
//! stream_id)` at ChaCha stream `i`, so results depend on the seed and the
//! sample count only, never on how many workers ran the blocks. Block
//! results are merged in block order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::sets::BorelSet;
use crate::tree::{sample_conditional, sample_tree, LevelVector, TreeSample};

pub const BLOCK_SIZE: usize = 4096;
pub const MIN_SAMPLES: usize = 100;
pub const MAX_JOINT_EVENTS: usize = 12;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

pub type Rng = ChaCha8Rng;

/// An addressable random stream: a master seed and a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_id(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// A child stream labelled `label`, for an independent sub-computation.
    pub fn fork(&self, label: u64) -> RngStream {
        RngStream {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    /// Generator for block `block` of this stream.
    pub fn block(&self, block: u64) -> Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(block);
        rng
    }

    /// Generator for sequential use (block 0).
    pub fn rng(&self) -> Rng {
        self.block(0)
    }
}

/// A Monte Carlo point estimate of a probability with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub estimate: f64,
    pub ci: [f64; 2],
    pub samples: u64,
    pub hits: u64,
    pub seed: u64,
    pub confidence: f64,
}

impl MeasureEstimate {
    pub fn from_counts(hits: u64, samples: u64, seed: u64, confidence: f64) -> Result<Self> {
        let (lo, hi) = wilson_interval(hits, samples, confidence)?;
        Ok(MeasureEstimate {
            estimate: hits as f64 / samples as f64,
            ci: [lo, hi],
            samples,
            hits,
            seed,
            confidence,
        })
    }

    pub fn ci_low(&self) -> f64 {
        self.ci[0]
    }

    pub fn ci_high(&self) -> f64 {
        self.ci[1]
    }

    /// Plug-in binomial standard error `√(p(1-p)/n)`.
    pub fn se(&self) -> f64 {
        let p = self.estimate;
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimates always serialize")
    }
}

/// Standard error of the difference of two independent estimates.
pub fn combined_se(a: &MeasureEstimate, b: &MeasureEstimate) -> f64 {
    a.se().hypot(b.se())
}

/// Wilson score interval for `hits` successes in `samples` trials.
pub fn wilson_interval(hits: u64, samples: u64, confidence: f64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(invalid("Wilson interval needs at least one sample"));
    }
    if hits > samples {
        return Err(invalid(format!("hits {hits} exceed samples {samples}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Pin the exact boundaries, which rounding can miss by an ulp.
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == samples { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo.min(p), hi.max(p)))
}

/// Frequencies of the `2^m` joint outcomes of `m` events. Cell index bit
/// `i` (least significant first) records event `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub events: usize,
    pub counts: Vec<u64>,
    pub samples: u64,
    pub seed: u64,
}

impl JointTable {
    pub fn probability(&self, cell: usize) -> f64 {
        self.counts[cell] as f64 / self.samples as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|c| self.probability(c)).collect()
    }

    /// Empirical probability of event `i`.
    pub fn marginal(&self, i: usize) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(c, _)| c >> i & 1 == 1)
            .map(|(_, n)| n)
            .sum();
        hits as f64 / self.samples as f64
    }

    /// Probability each cell would have if the events were independent with
    /// the observed marginals.
    pub fn product_of_marginals(&self) -> Vec<f64> {
        let m: Vec<f64> = (0..self.events).map(|i| self.marginal(i)).collect();
        (0..self.counts.len())
            .map(|c| {
                (0..self.events)
                    .map(|i| if c >> i & 1 == 1 { m[i] } else { 1.0 - m[i] })
                    .product()
            })
            .collect()
    }
}

/// Which law trees are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeLaw {
    /// `γ_ω`.
    Unconditional,
    /// `γ_z`: the law given `π_n = z`.
    Conditional(LevelVector),
}

impl TreeLaw {
    pub fn draw(&self, depth: u32, rng: &mut Rng) -> Result<TreeSample> {
        match self {
            TreeLaw::Unconditional => sample_tree(depth, rng),
            TreeLaw::Conditional(z) => sample_conditional(z, depth, rng),
        }
    }

    fn min_depth(&self) -> u32 {
        match self {
            TreeLaw::Unconditional => 0,
            TreeLaw::Conditional(z) => z.level(),
        }
    }
}

/// Runs sharded sampling on a fixed-size thread pool.
pub struct Engine {
    pool: rayon::ThreadPool,
    workers: usize,
    confidence: f64,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("workers", &self.workers)
            .field("confidence", &self.confidence)
            .finish()
    }
}

impl Engine {
    /// `workers = 0` uses one worker per available core.
    pub fn new(workers: usize) -> Result<Engine> {
        Self::with_confidence(workers, DEFAULT_CONFIDENCE)
    }

    pub fn with_confidence(workers: usize, confidence: f64) -> Result<Engine> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        let workers = pool.current_num_threads();
        Ok(Engine {
            pool,
            workers,
            confidence,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    /// Runs `f` inside the engine's thread pool.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }

    /// Runs `f(rng, count)` once per block and returns the results in block
    /// order. `count` is the number of samples in that block.
    pub fn map_blocks<T, F>(&self, stream: &RngStream, samples: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut Rng, usize) -> T + Sync + Send,
    {
        let blocks = samples.div_ceil(BLOCK_SIZE);
        self.pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let count = BLOCK_SIZE.min(samples - b * BLOCK_SIZE);
                    let mut rng = stream.block(b as u64);
                    f(&mut rng, count)
                })
                .collect()
        })
    }

    /// Tallies `cells` outcome counts, where `outcome` maps each sample to a
    /// cell index.
    pub fn tally<F>(&self, stream: &RngStream, samples: usize, cells: usize, outcome: F) -> Result<Vec<u64>>
    where
        F: Fn(&mut Rng) -> Result<usize> + Sync + Send,
    {
        let per_block = self.map_blocks(stream, samples, |rng, count| -> Result<Vec<u64>> {
            let mut acc = vec![0u64; cells];
            for _ in 0..count {
                acc[outcome(rng)?] += 1;
            }
            Ok(acc)
        });
        let mut total = vec![0u64; cells];
        for block in per_block {
            for (t, c) in total.iter_mut().zip(block?) {
                *t += c;
            }
        }
        Ok(total)
    }

    /// Probability that `event` holds for one draw, from `samples` draws.
    pub fn estimate_event<F>(&self, stream: &RngStream, samples: usize, event: F) -> Result<MeasureEstimate>
    where
        F: Fn(&mut Rng) -> Result<bool> + Sync + Send,
    {
        check_samples(samples)?;
        let counts = self.tally(stream, samples, 2, |rng| event(rng).map(usize::from))?;
        MeasureEstimate::from_counts(counts[1], samples as u64, stream.master_seed, self.confidence)
    }

    /// `γ_ω(π_n^{-1}(A))` from trees of the given depth.
    pub fn estimate_measure(
        &self,
        set: &BorelSet,
        depth: u32,
        samples: usize,
        stream: &RngStream,
    ) -> Result<MeasureEstimate> {
        self.estimate_under(&TreeLaw::Unconditional, set, depth, samples, stream)
    }

    /// `γ_z(A)`.
    pub fn estimate_conditional_measure(
        &self,
        set: &BorelSet,
        z: &LevelVector,
        depth: u32,
        samples: usize,
        stream: &RngStream,
    ) -> Result<MeasureEstimate> {
        self.estimate_under(&TreeLaw::Conditional(z.clone()), set, depth, samples, stream)
    }

    pub fn estimate_under(
        &self,
        law: &TreeLaw,
        set: &BorelSet,
        depth: u32,
        samples: usize,
        stream: &RngStream,
    ) -> Result<MeasureEstimate> {
        check_depth(depth, set.determination_level().max(law.min_depth()))?;
        self.estimate_event(stream, samples, |rng| {
            let t = law.draw(depth, rng)?;
            set.contains_tree(&t)
        })
    }

    pub fn estimate_joint_events(
        &self,
        events: &[BorelSet],
        depth: u32,
        samples: usize,
        stream: &RngStream,
    ) -> Result<JointTable> {
        self.estimate_joint_under(&TreeLaw::Unconditional, events, depth, samples, stream)
    }

    pub fn estimate_joint_under(
        &self,
        law: &TreeLaw,
        events: &[BorelSet],
        depth: u32,
        samples: usize,
        stream: &RngStream,
    ) -> Result<JointTable> {
        if events.len() > MAX_JOINT_EVENTS {
            return Err(Error::TooManyEvents {
                max: MAX_JOINT_EVENTS,
                found: events.len(),
            });
        }
        if events.is_empty() {
            return Err(invalid("joint table needs at least one event"));
        }
        check_samples(samples)?;
        let needed = events
            .iter()
            .map(BorelSet::determination_level)
            .max()
            .unwrap_or(0)
            .max(law.min_depth());
        check_depth(depth, needed)?;
        let counts = self.tally(stream, samples, 1 << events.len(), |rng| {
            let t = law.draw(depth, rng)?;
            let mut cell = 0;
            for (i, e) in events.iter().enumerate() {
                if e.contains_tree(&t)? {
                    cell |= 1 << i;
                }
            }
            Ok(cell)
        })?;
        Ok(JointTable {
            events: events.len(),
            counts,
            samples: samples as u64,
            seed: stream.master_seed,
        })
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            min: MIN_SAMPLES,
            found: samples,
        });
    }
    Ok(())
}

fn check_depth(depth: u32, required: u32) -> Result<()> {
    if depth < required {
        return Err(Error::DepthMismatch {
            required,
            actual: depth,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn unit_disk() -> BorelSet {
        BorelSet::disk(0, C::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn wilson_examples() {
        let (lo, _) = wilson_interval(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_interval(100, 100, 0.95).unwrap();
        assert_eq!(hi, 1.0);

        // z = 1.959964; p = 0.5, n = 1000:
        // centre = 0.5, half = z·√(0.00025 + z²/4e6)/(1 + z²/1000).
        let (lo, hi) = wilson_interval(500, 1000, 0.95).unwrap();
        assert!((lo - 0.469_06).abs() < 1e-4, "{lo}");
        assert!((hi - 0.530_94).abs() < 1e-4, "{hi}");

        assert!(wilson_interval(5, 4, 0.95).is_err());
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(1, 4, 1.0).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        use rand::Rng as _;
        let s = RngStream::new(7);
        let a: Vec<u64> = (0..4).map(|_| s.block(3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| s.block(3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = s.block(0).random();
        let y: u64 = s.fork(1).block(0).random();
        let z: u64 = RngStream::new(8).block(0).random();
        assert!(x != y && x != z && y != z);
    }

    #[test]
    fn full_space_and_argument_checks() {
        let e = Engine::new(2).unwrap();
        let s = RngStream::new(1);
        let full = BorelSet::disk(0, C::new(0.0, 0.0), f64::INFINITY).unwrap();
        let est = e.estimate_measure(&full, 0, 1000, &s).unwrap();
        assert_eq!(est.hits, 1000);
        assert_eq!(est.estimate, 1.0);
        assert!(matches!(
            e.estimate_measure(&full, 0, 99, &s),
            Err(Error::InsufficientSamples { .. })
        ));
        let deep = BorelSet::disk(3, C::new(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            e.estimate_measure(&deep, 2, 1000, &s),
            Err(Error::DepthMismatch { .. })
        ));
        let many = vec![unit_disk(); 13];
        assert!(matches!(
            e.estimate_joint_events(&many, 0, 1000, &s),
            Err(Error::TooManyEvents { .. })
        ));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let s = RngStream::with_id(99, 4);
        let a = Engine::new(1)
            .unwrap()
            .estimate_measure(&unit_disk(), 3, 20_000, &s)
            .unwrap();
        let b = Engine::new(4)
            .unwrap()
            .estimate_measure(&unit_disk(), 3, 20_000, &s)
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn joint_table_structure() {
        let e = Engine::new(0).unwrap();
        let s = RngStream::new(3);
        let a = unit_disk();
        let t = e.estimate_joint_events(std::slice::from_ref(&a), 0, 5000, &s).unwrap();
        assert_eq!(t.counts.len(), 2);
        assert_eq!(t.counts.iter().sum::<u64>(), 5000);

        let t = e
            .estimate_joint_events(&[a.clone(), a.complement()], 0, 5000, &s)
            .unwrap();
        assert_eq!(t.counts[0], 0);
        assert_eq!(t.counts[3], 0);
        assert!((t.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_json_shape() {
        let est = MeasureEstimate::from_counts(3, 10, 42, 0.95).unwrap();
        let v: serde_json::Value = serde_json::from_str(&est.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["ci", "confidence", "estimate", "hits", "samples", "seed"]);
        assert!(est.ci_low() <= est.estimate && est.estimate <= est.ci_high());
    }
}
