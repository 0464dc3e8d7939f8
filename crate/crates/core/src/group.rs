//! Step functions `2^ℕ → 𝕋` and their action on trees.
//!
//! An element of `S_n` depends only on the first `n` coordinates and is
//! stored as one unit-modulus phase per length-`n` binary string. It acts on
//! a tree by multiplying the value at every node of length at least `n` by
//! the phase of that node's length-`n` prefix; shallower levels are then
//! fixed by the averaging constraint.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::path::DyadicPath;
use crate::tree::{LevelVector, TreeSample, MAX_DEPTH};

/// Allowed drift of `|phase|` from 1.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelVector", into = "LevelVector")]
pub struct GroupElement {
    level: u32,
    phases: Vec<Complex64>,
}

impl TryFrom<LevelVector> for GroupElement {
    type Error = Error;

    fn try_from(v: LevelVector) -> Result<Self> {
        GroupElement::new(v.level(), v.entries().to_vec())
    }
}

impl From<GroupElement> for LevelVector {
    fn from(g: GroupElement) -> Self {
        LevelVector::new(g.level, g.phases).expect("group elements have 2^level phases")
    }
}

impl GroupElement {
    pub fn new(level: u32, phases: Vec<Complex64>) -> Result<Self> {
        if level > MAX_DEPTH {
            return Err(Error::TooDeep(level));
        }
        if phases.len() != 1 << level {
            return Err(Error::EntryCount {
                level,
                expected: 1 << level,
                found: phases.len(),
            });
        }
        if let Some(p) = phases.iter().find(|p| !((p.norm() - 1.0).abs() <= UNIT_TOL)) {
            return Err(invalid(format!("phase {p} is not of unit modulus")));
        }
        Ok(GroupElement { level, phases })
    }

    pub fn identity(level: u32) -> Result<Self> {
        Self::constant(level, 0.0)
    }

    /// The constant function `e^{iθ}`, materialized at `level`.
    pub fn constant(level: u32, theta: f64) -> Result<Self> {
        Self::new(level, vec![Complex64::from_polar(1.0, theta); 1 << level])
    }

    /// Phases `e^{iθ_σ}` from angles.
    pub fn from_angles(level: u32, angles: &[f64]) -> Result<Self> {
        Self::new(level, angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect())
    }

    /// Independent uniformly distributed phases.
    pub fn random<R: Rng + ?Sized>(level: u32, rng: &mut R) -> Result<Self> {
        let angles: Vec<f64> = (0..1u64 << level.min(MAX_DEPTH))
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        Self::from_angles(level, &angles)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// `g(σ)` for any `σ` of length at least the element's level.
    pub fn phase(&self, sigma: &DyadicPath) -> Complex64 {
        assert!(sigma.len() >= self.level, "path shorter than the element's level");
        self.phases[sigma.prefix(self.level).index() as usize]
    }

    pub fn conjugate(&self) -> GroupElement {
        GroupElement {
            level: self.level,
            phases: self.phases.iter().map(|p| p.conj()).collect(),
        }
    }

    /// Pointwise product of two elements at the same level.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                expected: self.level,
                found: other.level,
            });
        }
        Ok(GroupElement {
            level: self.level,
            phases: self.phases.iter().zip(&other.phases).map(|(a, b)| a * b).collect(),
        })
    }

    /// The same function viewed as an element of `S_m`, `m ≥ level`.
    pub fn embed(&self, m: u32) -> Result<GroupElement> {
        if m < self.level {
            return Err(invalid(format!(
                "cannot embed a level-{} element into level {m}",
                self.level
            )));
        }
        if m > MAX_DEPTH {
            return Err(Error::TooDeep(m));
        }
        let span = 1usize << (m - self.level);
        Ok(GroupElement {
            level: m,
            phases: self.phases.iter().flat_map(|&p| std::iter::repeat_n(p, span)).collect(),
        })
    }

    /// Acts on a tree of depth at least the element's level: leaves are
    /// multiplied by the phase of their prefix, then re-averaged upward.
    pub fn act(&self, t: &TreeSample) -> Result<TreeSample> {
        let depth = t.depth();
        if depth < self.level {
            return Err(Error::DepthMismatch {
                required: self.level,
                actual: depth,
            });
        }
        let shift = depth - self.level;
        Ok(t.map_leaves(|i, v| self.phases[i >> shift] * v))
    }
}

/// `g_{s,k}(x) = (1 + i s (-1)^{x(k)}) / √(1 + s²)`, materialized at level
/// `k + 1`.
pub fn make_gsk(s: f64, k: u32) -> Result<GroupElement> {
    if !s.is_finite() {
        return Err(invalid("whirling parameter must be finite"));
    }
    let level = k + 1;
    if level > MAX_DEPTH {
        return Err(Error::TooDeep(level));
    }
    let norm = (1.0 + s * s).sqrt();
    let plus = Complex64::new(1.0, s) / norm;
    let minus = Complex64::new(1.0, -s) / norm;
    let phases = DyadicPath::all(level)
        .map(|p| if p.bit(k) == 0 { plus } else { minus })
        .collect();
    GroupElement::new(level, phases)
}

/// Supremum distance `max_σ |g(σ) - h(σ)|`, after embedding both elements
/// at the larger level.
pub fn uniform_distance(g: &GroupElement, h: &GroupElement) -> f64 {
    let level = g.level.max(h.level);
    let (g, h) = (
        g.embed(level).expect("level within range"),
        h.embed(level).expect("level within range"),
    );
    g.phases
        .iter()
        .zip(&h.phases)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Left side minus right side of
/// `π_n(g_{s,k}·y) = (π_n(y) + i s U_{n,k}(y)) / √(1 + s²)`, as a maximum
/// entrywise modulus.
pub fn action_identity_residual(y: &TreeSample, n: u32, k: u32, s: f64) -> Result<f64> {
    if k < n {
        return Err(invalid(format!("need n ≤ k, got n = {n}, k = {k}")));
    }
    let lhs = make_gsk(s, k)?.act(y)?.project(n)?;
    let u = y.u_vector(n, k)?;
    let rhs = y
        .project(n)?
        .add_scaled(&u, Complex64::new(0.0, s))?
        .scale(1.0 / (1.0 + s * s).sqrt());
    lhs.max_abs_diff(&rhs)
}
