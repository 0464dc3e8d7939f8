//! Exact sampling of the dyadic Gaussian tree process.
//!
//! A tree of depth `N` stores a complex value at every binary string of
//! length at most `N`, one `Vec` per level in lexicographic order. Values
//! satisfy the averaging constraint `x(σ) = (x(σ0) + x(σ1)) / √2` at every
//! internal node. They are generated top-down from independent innovations:
//! the root is a standard complex Gaussian `U_*`, and each node `σ` above the
//! leaves draws `U_σ` and sets its children to `(x(σ) ± U_σ) / √2`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian;
use crate::path::DyadicPath;

/// Deepest tree the crate will allocate (2^21 complex values in total).
pub const MAX_DEPTH: u32 = 20;

/// Relative tolerance of the averaging constraint.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// An element of `ℂ^{2^n}`, indexed by the length-`n` binary strings in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelVectorRepr", into = "LevelVectorRepr")]
pub struct LevelVector {
    level: u32,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelVectorRepr {
    level: u32,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<LevelVectorRepr> for LevelVector {
    type Error = Error;

    fn try_from(r: LevelVectorRepr) -> Result<Self> {
        if r.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(crate::error::invalid("level vector entries must be finite"));
        }
        LevelVector::new(
            r.level,
            r.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        )
    }
}

impl From<LevelVector> for LevelVectorRepr {
    fn from(v: LevelVector) -> Self {
        LevelVectorRepr {
            level: v.level,
            entries: v.entries.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl LevelVector {
    pub fn new(level: u32, entries: Vec<Complex64>) -> Result<Self> {
        check_depth(level)?;
        let expected = 1usize << level;
        if entries.len() != expected {
            return Err(Error::EntryCount {
                level,
                expected,
                found: entries.len(),
            });
        }
        Ok(LevelVector { level, entries })
    }

    pub fn zeros(level: u32) -> Result<Self> {
        Self::constant(level, Complex64::new(0.0, 0.0))
    }

    pub fn constant(level: u32, value: Complex64) -> Result<Self> {
        check_depth(level)?;
        Ok(LevelVector {
            level,
            entries: vec![value; 1 << level],
        })
    }

    /// Independent standard complex Gaussian entries, i.e. a draw from `γ_n`.
    pub fn sample<R: Rng + ?Sized>(level: u32, rng: &mut R) -> Result<Self> {
        check_depth(level)?;
        Ok(LevelVector {
            level,
            entries: (0..1usize << level).map(|_| gaussian::sample(rng)).collect(),
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, path: &DyadicPath) -> Complex64 {
        assert_eq!(path.len(), self.level, "path length must match the level");
        self.entries[path.index() as usize]
    }

    /// Composite projection `π_{level, n}`: each length-`n` entry is
    /// `2^{-k/2}` times the sum over its `2^k` descendants, `k = level - n`.
    pub fn project(&self, n: u32) -> Result<LevelVector> {
        if n > self.level {
            return Err(Error::DepthMismatch {
                required: n,
                actual: self.level,
            });
        }
        let k = self.level - n;
        let block = 1usize << k;
        let scale = FRAC_1_SQRT_2.powi(k as i32);
        let entries = self
            .entries
            .chunks(block)
            .map(|c| c.iter().sum::<Complex64>() * scale)
            .collect();
        Ok(LevelVector { level: n, entries })
    }

    pub fn scale(&self, c: f64) -> LevelVector {
        LevelVector {
            level: self.level,
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &LevelVector, c: Complex64) -> Result<LevelVector> {
        self.same_level(other)?;
        Ok(LevelVector {
            level: self.level,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x + c * y)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &LevelVector) -> Result<f64> {
        self.same_level(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    fn same_level(&self, other: &LevelVector) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                found: other.level,
            });
        }
        Ok(())
    }
}

/// How children are generated from a parent and its innovation. Only
/// [`Recursion::Exact`] produces the tree process; the other variant exists
/// so negative controls can exercise a sampler known to be wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recursion {
    #[default]
    Exact,
    /// Children `x(σ) ± U_σ` without the `1/√2` factor.
    Unnormalized,
}

impl Recursion {
    fn factor(self) -> f64 {
        match self {
            Recursion::Exact => FRAC_1_SQRT_2,
            Recursion::Unnormalized => 1.0,
        }
    }
}

/// A realization of the tree process truncated at `depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSample {
    levels: Vec<Vec<Complex64>>,
}

impl TreeSample {
    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn value(&self, path: &DyadicPath) -> Complex64 {
        assert!(path.len() <= self.depth(), "path deeper than the tree");
        self.levels[path.len() as usize][path.index() as usize]
    }

    pub fn root(&self) -> Complex64 {
        self.levels[0][0]
    }

    pub fn level_values(&self, n: u32) -> &[Complex64] {
        &self.levels[n as usize]
    }

    pub fn leaves(&self) -> &[Complex64] {
        self.levels.last().expect("tree has at least a root")
    }

    /// Builds a tree from explicit per-level values, rejecting any that
    /// violate the averaging constraint.
    pub fn from_levels(levels: Vec<Vec<Complex64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(crate::error::invalid("a tree needs at least a root level"));
        }
        check_depth((levels.len() - 1) as u32)?;
        for (n, lv) in levels.iter().enumerate() {
            if lv.len() != 1 << n {
                return Err(Error::EntryCount {
                    level: n as u32,
                    expected: 1 << n,
                    found: lv.len(),
                });
            }
        }
        let tree = TreeSample { levels };
        tree.check_constraint()?;
        Ok(tree)
    }

    /// The unique tree whose deepest level is `leaves`.
    pub fn from_leaves(leaves: LevelVector) -> TreeSample {
        let depth = leaves.level as usize;
        let mut levels = vec![Vec::new(); depth + 1];
        levels[depth] = leaves.entries;
        for n in (0..depth).rev() {
            levels[n] = average_up(&levels[n + 1]);
        }
        TreeSample { levels }
    }

    /// First node whose value differs from the average of its children by
    /// more than the relative tolerance.
    pub fn check_constraint(&self) -> Result<()> {
        for n in 0..self.depth() as usize {
            for (i, &v) in self.levels[n].iter().enumerate() {
                let avg = (self.levels[n + 1][2 * i] + self.levels[n + 1][2 * i + 1]) * FRAC_1_SQRT_2;
                let residual = (v - avg).norm();
                if !(residual <= CONSTRAINT_TOL * (1.0 + v.norm())) {
                    return Err(Error::ConstraintViolation {
                        level: n as u32,
                        index: i as u64,
                        residual,
                    });
                }
            }
        }
        Ok(())
    }

    /// `π_n`: the stored level-`n` values.
    pub fn project(&self, n: u32) -> Result<LevelVector> {
        if n > self.depth() {
            return Err(Error::DepthMismatch {
                required: n,
                actual: self.depth(),
            });
        }
        Ok(LevelVector {
            level: n,
            entries: self.levels[n as usize].clone(),
        })
    }

    /// Innovation at an internal node: `U_σ = (x(σ0) - x(σ1)) / √2`.
    pub fn innovation(&self, sigma: &DyadicPath) -> Result<Complex64> {
        if sigma.len() + 1 > self.depth() {
            return Err(Error::DepthMismatch {
                required: sigma.len() + 1,
                actual: self.depth(),
            });
        }
        let below = &self.levels[sigma.len() as usize + 1];
        let i = 2 * sigma.index() as usize;
        Ok((below[i] - below[i + 1]) * FRAC_1_SQRT_2)
    }

    /// `U_{σ,k} = 2^{-(k-n)/2} Σ_{τ ∈ 2^{k-n}} U_{σ⌢τ}` for `|σ| = n ≤ k`.
    pub fn u_stat(&self, sigma: &DyadicPath, k: u32) -> Result<Complex64> {
        let n = sigma.len();
        if k < n {
            return Err(crate::error::invalid(format!(
                "U statistic level {k} is above the path length {n}"
            )));
        }
        if k + 1 > self.depth() {
            return Err(Error::DepthMismatch {
                required: k + 1,
                actual: self.depth(),
            });
        }
        let span = 1usize << (k - n);
        let start = sigma.index() as usize * span;
        let below = &self.levels[k as usize + 1];
        let sum: Complex64 = (start..start + span).map(|j| below[2 * j] - below[2 * j + 1]).sum();
        Ok(sum * FRAC_1_SQRT_2 * FRAC_1_SQRT_2.powi((k - n) as i32))
    }

    /// The level-`n` vector `(U_{σ,k} : σ ∈ 2^n)`.
    pub fn u_vector(&self, n: u32, k: u32) -> Result<LevelVector> {
        check_depth(n)?;
        let entries = DyadicPath::all(n)
            .map(|p| self.u_stat(&p, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelVector { level: n, entries })
    }

    /// Replaces the leaves and re-averages every level above them.
    pub(crate) fn map_leaves(&self, f: impl Fn(usize, Complex64) -> Complex64) -> TreeSample {
        let depth = self.depth();
        let leaves = self.leaves().iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        TreeSample::from_leaves(LevelVector {
            level: depth,
            entries: leaves,
        })
    }
}

fn average_up(below: &[Complex64]) -> Vec<Complex64> {
    below.chunks_exact(2).map(|c| (c[0] + c[1]) * FRAC_1_SQRT_2).collect()
}

fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::TooDeep(depth));
    }
    Ok(())
}

fn grow<R: Rng + ?Sized>(levels: &mut Vec<Vec<Complex64>>, depth: u32, recursion: Recursion, rng: &mut R) {
    let c = recursion.factor();
    while levels.len() <= depth as usize {
        let above = levels.last().expect("seeded with at least one level");
        let mut next = Vec::with_capacity(above.len() * 2);
        for &z in above {
            let u = gaussian::sample(rng);
            next.push((z + u) * c);
            next.push((z - u) * c);
        }
        levels.push(next);
    }
}

/// Draws a tree of the given depth from `γ_ω`. Draw order is the root, then
/// one innovation per node, level by level in lexicographic order.
pub fn sample_tree<R: Rng + ?Sized>(depth: u32, rng: &mut R) -> Result<TreeSample> {
    sample_tree_with(depth, Recursion::Exact, rng)
}

pub fn sample_tree_with<R: Rng + ?Sized>(depth: u32, recursion: Recursion, rng: &mut R) -> Result<TreeSample> {
    check_depth(depth)?;
    let mut levels = Vec::with_capacity(depth as usize + 1);
    levels.push(vec![gaussian::sample(rng)]);
    grow(&mut levels, depth, recursion, rng);
    Ok(TreeSample { levels })
}

/// Draws from the conditional law `γ_z` of the tree given `π_n = z`,
/// truncated at `depth`. Conditioned on `π_n`, the innovations below level
/// `n` are still i.i.d. standard complex Gaussians, so the levels above `n`
/// are the dyadic averages of `z` and those below are grown afresh.
pub fn sample_conditional<R: Rng + ?Sized>(z: &LevelVector, depth: u32, rng: &mut R) -> Result<TreeSample> {
    check_depth(depth)?;
    if depth < z.level {
        return Err(Error::DepthMismatch {
            required: z.level,
            actual: depth,
        });
    }
    let mut levels = vec![Vec::new(); z.level as usize + 1];
    levels[z.level as usize] = z.entries.clone();
    for n in (0..z.level as usize).rev() {
        levels[n] = average_up(&levels[n + 1]);
    }
    grow(&mut levels, depth, Recursion::Exact, rng);
    Ok(TreeSample { levels })
}

/// The coordinates of a tree under `Φ`: its root and every innovation
/// `U_σ` with `|σ| < depth`, one `Vec` per level.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovations {
    pub root: Complex64,
    pub by_level: Vec<Vec<Complex64>>,
}

impl Innovations {
    pub fn of(tree: &TreeSample) -> Innovations {
        let by_level = (0..tree.depth() as usize)
            .map(|n| {
                tree.levels[n + 1]
                    .chunks_exact(2)
                    .map(|c| (c[0] - c[1]) * FRAC_1_SQRT_2)
                    .collect()
            })
            .collect();
        Innovations {
            root: tree.root(),
            by_level,
        }
    }

    /// Inverse of [`Innovations::of`]: rebuilds the tree by the recursion.
    pub fn rebuild(&self) -> TreeSample {
        let mut levels = Vec::with_capacity(self.by_level.len() + 1);
        levels.push(vec![self.root]);
        for us in &self.by_level {
            let above = levels.last().unwrap();
            let next = above
                .iter()
                .zip(us)
                .flat_map(|(&z, &u)| [(z + u) * FRAC_1_SQRT_2, (z - u) * FRAC_1_SQRT_2])
                .collect();
            levels.push(next);
        }
        TreeSample { levels }
    }
}

/// Maximum entrywise difference between a tree and its rebuild from `Φ`
/// coordinates.
pub fn phi_roundtrip(tree: &TreeSample) -> f64 {
    let rebuilt = Innovations::of(tree).rebuild();
    tree.levels
        .iter()
        .flatten()
        .zip(rebuilt.levels.iter().flatten())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn depth_zero_is_a_single_root() {
        let t = sample_tree(0, &mut rng(1)).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.leaves().len(), 1);
    }

    #[test]
    fn same_seed_same_tree() {
        let a = sample_tree(2, &mut rng(9)).unwrap();
        let b = sample_tree(2, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        let c = sample_tree(2, &mut rng(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_trees_satisfy_the_constraint() {
        let mut r = rng(3);
        for d in 0..10 {
            sample_tree(d, &mut r).unwrap().check_constraint().unwrap();
        }
    }

    #[test]
    fn projection_examples() {
        let c = C::new(0.3, -1.1);
        let t = TreeSample::from_leaves(LevelVector::new(1, vec![c, c]).unwrap());
        let p = t.project(0).unwrap();
        assert!((p.entries()[0] - c * 2f64.sqrt()).norm() < 1e-15);

        let t = TreeSample::from_leaves(LevelVector::new(1, vec![C::new(1.0, 1.0), C::new(1.0, -1.0)]).unwrap());
        assert!((t.root() - C::new(2f64.sqrt(), 0.0)).norm() < 1e-15);

        let t = sample_tree(4, &mut rng(5)).unwrap();
        assert_eq!(t.project(4).unwrap().entries(), t.leaves());
        assert!(matches!(t.project(5), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn stored_levels_match_composite_projection_of_leaves() {
        let t = sample_tree(7, &mut rng(11)).unwrap();
        let leaves = t.project(7).unwrap();
        for n in 0..=7 {
            let direct = leaves.project(n).unwrap();
            let diff = direct.max_abs_diff(&t.project(n).unwrap()).unwrap();
            assert!(diff <= 1e-12, "level {n}: {diff}");
        }
    }

    #[test]
    fn conditional_sampler_pins_level_n() {
        let mut r = rng(2);
        let z = LevelVector::new(0, vec![C::new(0.0, 0.0)]).unwrap();
        let t = sample_conditional(&z, 0, &mut r).unwrap();
        assert_eq!(t.root(), C::new(0.0, 0.0));
        assert_eq!(t.depth(), 0);

        let z = LevelVector::sample(3, &mut r).unwrap();
        let t = sample_conditional(&z, 3, &mut r).unwrap();
        assert_eq!(t.depth(), 3);
        assert_eq!(t.project(3).unwrap(), z);

        let t = sample_conditional(&z, 6, &mut r).unwrap();
        assert_eq!(t.project(3).unwrap(), z);
        t.check_constraint().unwrap();

        assert!(matches!(
            sample_conditional(&z, 2, &mut r),
            Err(Error::DepthMismatch { required: 3, actual: 2 })
        ));
    }

    #[test]
    fn u_stat_base_case_and_recursion() {
        let t = sample_tree(6, &mut rng(4)).unwrap();
        for sigma in DyadicPath::all(2) {
            let direct = (t.value(&sigma.child(0)) - t.value(&sigma.child(1))) * FRAC_1_SQRT_2;
            assert!((t.u_stat(&sigma, 2).unwrap() - direct).norm() < 1e-15);
            for k in 3..6 {
                let lhs = t.u_stat(&sigma, k).unwrap();
                let rhs =
                    (t.u_stat(&sigma.child(0), k).unwrap() + t.u_stat(&sigma.child(1), k).unwrap()) * FRAC_1_SQRT_2;
                assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }
        }
        let s = DyadicPath::new(&[0, 1]).unwrap();
        assert!(t.u_stat(&s, 6).is_err());
        assert!(t.u_stat(&s, 1).is_err());
    }

    #[test]
    fn phi_roundtrip_examples() {
        let zero = TreeSample::from_leaves(LevelVector::zeros(5).unwrap());
        assert_eq!(phi_roundtrip(&zero), 0.0);

        let t = sample_tree(8, &mut rng(8)).unwrap();
        assert!(phi_roundtrip(&t) <= 1e-10);
        let inn = Innovations::of(&t);
        assert_eq!(inn.by_level.len(), 8);
        assert_eq!(inn.by_level[7].len(), 128);
    }

    #[test]
    fn perturbed_leaf_is_rejected() {
        let t = sample_tree(3, &mut rng(6)).unwrap();
        let mut levels = t.levels.clone();
        levels[3][5] += C::new(1.0, 0.0);
        let err = TreeSample::from_levels(levels).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { level: 2, index: 2, .. }));
        TreeSample::from_levels(t.levels.clone()).unwrap();
    }

    #[test]
    fn level_vector_shape_is_checked() {
        assert!(matches!(
            LevelVector::new(2, vec![C::new(0.0, 0.0); 3]),
            Err(Error::EntryCount {
                expected: 4,
                found: 3,
                ..
            })
        ));
        assert!(matches!(LevelVector::zeros(MAX_DEPTH + 1), Err(Error::TooDeep(_))));
    }

    #[test]
    fn level_vector_json_roundtrip() {
        let v = LevelVector::new(1, vec![C::new(1.0, -2.0), C::new(0.5, 0.0)]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"level":1,"entries":[[1.0,-2.0],[0.5,0.0]]}"#);
        assert_eq!(serde_json::from_str::<LevelVector>(&s).unwrap(), v);
        assert!(serde_json::from_str::<LevelVector>(r#"{"level":1,"entries":[[1,2]]}"#).is_err());
    }
}
