//! Finite-level Borel sets.
//!
//! A set is an expression tree whose membership is decided by the
//! projection of a point onto the set's determination level. Evaluating on
//! a deeper tree or vector therefore tests the cylinder `π_n^{-1}(A)`.

use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::GroupElement;
use crate::tree::{LevelVector, TreeSample, MAX_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersection,
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Full {
        level: u32,
    },
    DiskProduct {
        centers: LevelVector,
        radii: Vec<f64>,
    },
    /// `Re Σ_σ conj(normal(σ))·x(σ) < offset`.
    Halfspace {
        normal: LevelVector,
        offset: f64,
    },
    /// `scale·base + shift`.
    AffineImage {
        base: BorelSet,
        scale: f64,
        shift: LevelVector,
    },
    Union(Vec<BorelSet>),
    Intersection(Vec<BorelSet>),
    Complement(BorelSet),
    /// `g·base = {x : g⁻¹·x ∈ base}`.
    Acted {
        g: GroupElement,
        /// `g⁻¹` embedded at the node's determination level.
        inverse: GroupElement,
        base: BorelSet,
    },
}

/// A membership predicate with a determination level. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelSet {
    node: Arc<Node>,
    level: u32,
}

enum Point<'a> {
    Tree(&'a TreeSample),
    Vector(&'a LevelVector),
}

impl Point<'_> {
    fn values(&self, n: u32) -> Cow<'_, [Complex64]> {
        match self {
            Point::Tree(t) => Cow::Borrowed(t.level_values(n)),
            Point::Vector(v) if v.level() == n => Cow::Borrowed(v.entries()),
            Point::Vector(v) => Cow::Owned(v.project(n).expect("level checked").entries().to_vec()),
        }
    }
}

impl BorelSet {
    fn from_node(node: Node) -> BorelSet {
        let level = match &node {
            Node::Full { level } => *level,
            Node::DiskProduct { centers, .. } => centers.level(),
            Node::Halfspace { normal, .. } => normal.level(),
            Node::AffineImage { base, .. } => base.level,
            Node::Union(xs) | Node::Intersection(xs) => xs.iter().map(|s| s.level).max().unwrap_or(0),
            Node::Complement(base) => base.level,
            Node::Acted { g, base, .. } => g.level().max(base.level),
        };
        BorelSet {
            node: Arc::new(node),
            level,
        }
    }

    /// The whole space, as a set determined at `level`.
    pub fn full(level: u32) -> Result<BorelSet> {
        if level > MAX_DEPTH {
            return Err(Error::TooDeep(level));
        }
        Ok(Self::from_node(Node::Full { level }))
    }

    /// `{x : |x(σ) - centers(σ)| < radii(σ) for all σ}`. Radii may be
    /// infinite.
    pub fn disk_product(centers: LevelVector, radii: Vec<f64>) -> Result<BorelSet> {
        if radii.len() != centers.entries().len() {
            return Err(Error::EntryCount {
                level: centers.level(),
                expected: centers.entries().len(),
                found: radii.len(),
            });
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
            return Err(invalid(format!("disk radius must be positive, got {r}")));
        }
        if centers.entries().iter().any(|c| !c.is_finite()) {
            return Err(invalid("disk centres must be finite"));
        }
        Ok(Self::from_node(Node::DiskProduct { centers, radii }))
    }

    /// Product of identical disks `N_radius(center)` at every node of `level`.
    pub fn disk(level: u32, center: Complex64, radius: f64) -> Result<BorelSet> {
        Self::disk_product(LevelVector::constant(level, center)?, vec![radius; 1 << level])
    }

    pub fn halfspace(normal: LevelVector, offset: f64) -> Result<BorelSet> {
        if !offset.is_finite() || normal.entries().iter().any(|c| !c.is_finite()) {
            return Err(invalid("halfspace coefficients must be finite"));
        }
        Ok(Self::from_node(Node::Halfspace { normal, offset }))
    }

    /// `scale·base + shift`; membership of `x` is membership of
    /// `(x - shift)/scale` in `base`.
    pub fn affine_image(base: &BorelSet, scale: f64, shift: LevelVector) -> Result<BorelSet> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid(format!(
                "affine scale must be positive and finite, got {scale}"
            )));
        }
        if shift.level() != base.level {
            return Err(Error::LevelMismatch {
                expected: base.level,
                found: shift.level(),
            });
        }
        if shift.entries().iter().any(|c| !c.is_finite()) {
            return Err(invalid("affine shift must be finite"));
        }
        Ok(Self::from_node(Node::AffineImage {
            base: base.clone(),
            scale,
            shift,
        }))
    }

    pub fn boolean_combine(op: BoolOp, operands: &[BorelSet]) -> Result<BorelSet> {
        if operands.is_empty() {
            return Err(invalid("boolean combination needs at least one operand"));
        }
        Ok(match op {
            BoolOp::Union => Self::from_node(Node::Union(operands.to_vec())),
            BoolOp::Intersection => Self::from_node(Node::Intersection(operands.to_vec())),
            BoolOp::Complement => {
                if operands.len() != 1 {
                    return Err(invalid("complement takes exactly one operand"));
                }
                Self::from_node(Node::Complement(operands[0].clone()))
            }
        })
    }

    pub fn union(operands: &[BorelSet]) -> Result<BorelSet> {
        Self::boolean_combine(BoolOp::Union, operands)
    }

    pub fn intersection(operands: &[BorelSet]) -> Result<BorelSet> {
        Self::boolean_combine(BoolOp::Intersection, operands)
    }

    pub fn complement(&self) -> BorelSet {
        Self::from_node(Node::Complement(self.clone()))
    }

    pub fn symmetric_difference(a: &BorelSet, b: &BorelSet) -> BorelSet {
        let left = Self::from_node(Node::Intersection(vec![a.clone(), b.complement()]));
        let right = Self::from_node(Node::Intersection(vec![a.complement(), b.clone()]));
        Self::from_node(Node::Union(vec![left, right]))
    }

    /// `g·A`. A tree `t` belongs to it exactly when `g⁻¹·t` belongs to `A`.
    pub fn acted(g: &GroupElement, base: &BorelSet) -> BorelSet {
        let level = g.level().max(base.level);
        Self::from_node(Node::Acted {
            g: g.clone(),
            inverse: g.conjugate().embed(level).expect("level bounded by its inputs"),
            base: base.clone(),
        })
    }

    pub fn determination_level(&self) -> u32 {
        self.level
    }

    /// Membership of a tree of depth at least the determination level.
    pub fn contains_tree(&self, t: &TreeSample) -> Result<bool> {
        self.check_level(t.depth())?;
        Ok(self.eval(&Point::Tree(t)))
    }

    /// Membership of a vector at or below the determination level.
    pub fn contains(&self, x: &LevelVector) -> Result<bool> {
        self.check_level(x.level())?;
        Ok(self.eval(&Point::Vector(x)))
    }

    fn check_level(&self, have: u32) -> Result<()> {
        if have < self.level {
            return Err(Error::DepthMismatch {
                required: self.level,
                actual: have,
            });
        }
        Ok(())
    }

    fn eval(&self, p: &Point<'_>) -> bool {
        match &*self.node {
            Node::Full { .. } => true,
            Node::DiskProduct { centers, radii } => {
                let x = p.values(centers.level());
                x.iter()
                    .zip(centers.entries())
                    .zip(radii)
                    .all(|((x, c), r)| (x - c).norm() < *r)
            }
            Node::Halfspace { normal, offset } => {
                let x = p.values(normal.level());
                let dot: f64 = x.iter().zip(normal.entries()).map(|(x, a)| (a.conj() * x).re).sum();
                dot < *offset
            }
            Node::AffineImage { base, scale, shift } => {
                let x = p.values(shift.level());
                let w: Vec<Complex64> = x.iter().zip(shift.entries()).map(|(x, v)| (x - v) / scale).collect();
                let w = LevelVector::new(shift.level(), w).expect("same shape as shift");
                base.eval(&Point::Vector(&w))
            }
            Node::Union(xs) => xs.iter().any(|s| s.eval(p)),
            Node::Intersection(xs) => xs.iter().all(|s| s.eval(p)),
            Node::Complement(base) => !base.eval(p),
            Node::Acted { inverse, base, .. } => {
                // g is constant below its level, so acting on the level-L
                // values and re-averaging gives the levels ≤ L of g⁻¹·x.
                let x = p.values(self.level);
                let moved: Vec<Complex64> = x.iter().zip(inverse.phases()).map(|(x, g)| g * x).collect();
                let moved =
                    TreeSample::from_leaves(LevelVector::new(self.level, moved).expect("shape fixed by the level"));
                base.eval(&Point::Tree(&moved))
            }
        }
    }

    pub fn to_spec(&self) -> SetSpec {
        let pairs = |v: &LevelVector| v.entries().iter().map(|c| [c.re, c.im]).collect();
        let children = |xs: &[BorelSet]| xs.iter().map(BorelSet::to_spec).collect();
        match &*self.node {
            Node::Full { level } => SetSpec::Full { level: *level },
            Node::DiskProduct { centers, radii } => SetSpec::DiskProduct {
                level: centers.level(),
                centers: pairs(centers),
                radii: radii.clone(),
            },
            Node::Halfspace { normal, offset } => SetSpec::Halfspace {
                level: normal.level(),
                normal: pairs(normal),
                offset: *offset,
            },
            Node::AffineImage { base, scale, shift } => SetSpec::AffineImage {
                level: shift.level(),
                scale: *scale,
                shift: pairs(shift),
                children: vec![base.to_spec()],
            },
            Node::Union(xs) => SetSpec::Union { children: children(xs) },
            Node::Intersection(xs) => SetSpec::Intersection { children: children(xs) },
            Node::Complement(base) => SetSpec::Complement {
                children: vec![base.to_spec()],
            },
            Node::Acted { g, base, .. } => SetSpec::Acted {
                level: g.level(),
                phases: g.phases().iter().map(|c| [c.re, c.im]).collect(),
                children: vec![base.to_spec()],
            },
        }
    }

    pub fn from_spec(spec: &SetSpec) -> Result<BorelSet> {
        fn vector(level: u32, pairs: &[[f64; 2]]) -> Result<LevelVector> {
            if level > MAX_DEPTH {
                return Err(Error::TooDeep(level));
            }
            LevelVector::new(level, pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        }
        fn only_child(children: &[SetSpec]) -> Result<BorelSet> {
            match children {
                [one] => BorelSet::from_spec(one),
                _ => Err(invalid(format!("expected exactly one child, got {}", children.len()))),
            }
        }
        fn all(children: &[SetSpec]) -> Result<Vec<BorelSet>> {
            children.iter().map(BorelSet::from_spec).collect()
        }
        match spec {
            SetSpec::Full { level } => BorelSet::full(*level),
            SetSpec::DiskProduct { level, centers, radii } => {
                BorelSet::disk_product(vector(*level, centers)?, radii.clone())
            }
            SetSpec::Halfspace { level, normal, offset } => BorelSet::halfspace(vector(*level, normal)?, *offset),
            SetSpec::AffineImage {
                level,
                scale,
                shift,
                children,
            } => BorelSet::affine_image(&only_child(children)?, *scale, vector(*level, shift)?),
            SetSpec::Union { children } => BorelSet::union(&all(children)?),
            SetSpec::Intersection { children } => BorelSet::intersection(&all(children)?),
            SetSpec::Complement { children } => Ok(only_child(children)?.complement()),
            SetSpec::Acted {
                level,
                phases,
                children,
            } => {
                if phases.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("phases must be finite"));
                }
                let g = GroupElement::try_from(vector(*level, phases)?)?;
                Ok(BorelSet::acted(&g, &only_child(children)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("set specs always serialize")
    }

    pub fn from_json(s: &str) -> Result<BorelSet> {
        let spec: SetSpec = serde_json::from_str(s).map_err(|e| invalid(format!("set JSON: {e}")))?;
        BorelSet::from_spec(&spec)
    }
}

/// Serialized form of a [`BorelSet`]: a JSON expression tree tagged by
/// `kind`, with complex numbers written as `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Full {
        level: u32,
    },
    DiskProduct {
        level: u32,
        centers: Vec<[f64; 2]>,
        radii: Vec<f64>,
    },
    Halfspace {
        level: u32,
        normal: Vec<[f64; 2]>,
        offset: f64,
    },
    AffineImage {
        level: u32,
        scale: f64,
        shift: Vec<[f64; 2]>,
        children: Vec<SetSpec>,
    },
    Union {
        children: Vec<SetSpec>,
    },
    Intersection {
        children: Vec<SetSpec>,
    },
    Complement {
        children: Vec<SetSpec>,
    },
    Acted {
        level: u32,
        phases: Vec<[f64; 2]>,
        children: Vec<SetSpec>,
    },
}
