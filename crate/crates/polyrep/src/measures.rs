//! Finitely supported measures on box-shaped strategy spaces.
//!
//! # Mathematical background
//!
//! A population state is a probability measure on a compact box S ⊂ ℝᵈ.
//! This module restricts attention to finitely supported measures
//!
//! ```text
//! P = Σⱼ αⱼ δ_{xⱼ},    xⱼ ∈ S,
//! ```
//!
//! stored in a canonical form: atoms within a merge tolerance of each other
//! are combined, atoms with negligible weight are dropped, and the remaining
//! atoms are sorted lexicographically by coordinates. Canonical form makes
//! equality, distance, and serialization deterministic.
//!
//! Two functionals drive everything downstream:
//!
//! * the variational distance `‖P − Q‖ = Σ |P({x}) − Q({x})|`, the total
//!   weight discrepancy over the union of the supports (twice the supremum
//!   of |P(B) − Q(B)| over Borel sets B), and
//! * the relative entropy `V(Q) = Σⱼ αⱼ ln(αⱼ / Q({xⱼ}))` of a target
//!   `P* = Σⱼ αⱼ δ_{xⱼ}` against a state Q that charges every target atom,
//!   which serves as the Lyapunov function for the replicator dynamics.
//!
//! The two are linked by the classical inequality
//! `‖Q − P*‖² ≤ 2 V(Q)`; only this factor-2 form holds in general, and
//! [`pinsker_gap`](DiscreteMeasure::pinsker_gap) exposes both sides so the
//! sharper un-factored variant can be examined per state.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Atoms closer than this in max-norm are treated as the same point.
pub const MERGE_TOL: f64 = 1e-9;

/// Atoms with |weight| below this are dropped during canonicalization.
pub const DROP_TOL: f64 = 1e-12;

/// Tolerance on |total mass − 1| for probability measures.
pub const MASS_TOL: f64 = 1e-9;

/// Positivity floor for weights in the relative-entropy denominator.
pub const KL_FLOOR: f64 = 1e-300;

/// A compact axis-aligned box in ℝᵈ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl StrategySpace {
    /// Builds a box from per-coordinate bounds. Every lower bound must be
    /// finite and strictly below its finite upper bound.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBounds("dimension must be at least 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds("lower and upper differ in length"));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBounds("bounds must be finite"));
            }
            if lo >= hi {
                return Err(Error::InvalidBounds("lower bound must be below upper"));
            }
        }
        Ok(StrategySpace { lower, upper })
    }

    /// One-dimensional box [lo, hi].
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        StrategySpace::new(vec![lo], vec![hi])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Whether a coordinate vector lies inside the box (bounds included).
    pub fn contains(&self, coords: &[f64]) -> bool {
        coords.len() == self.dimension()
            && coords
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(c, (lo, hi))| c.is_finite() && *lo <= *c && *c <= *hi)
    }

    /// Validates a coordinate vector and wraps it as a point of this space.
    pub fn point(&self, coords: Vec<f64>) -> Result<StrategyPoint> {
        if coords.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: coords.len(),
            });
        }
        for (index, value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    index,
                    value: *value,
                });
            }
        }
        if !self.contains(&coords) {
            return Err(Error::OutOfSpace { coords });
        }
        Ok(StrategyPoint { coords })
    }
}

/// A pure strategy: one point of the space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyPoint {
    coords: Vec<f64>,
}

impl StrategyPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// First (often only) coordinate.
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    /// Max-norm distance to another point.
    pub fn max_norm_distance(&self, other: &StrategyPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether two points coincide up to the merge tolerance.
    pub fn coincides(&self, other: &StrategyPoint) -> bool {
        self.coords.len() == other.coords.len() && self.max_norm_distance(other) <= MERGE_TOL
    }

    /// Lexicographic order on coordinates; total because coordinates are
    /// finite by construction.
    pub fn lex_cmp(&self, other: &StrategyPoint) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.partial_cmp(b).expect("coordinates are finite") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

/// A finitely supported measure in canonical form.
///
/// The `probability` tag records whether the measure was constructed and
/// validated as a probability measure (non-negative weights, unit mass up to
/// [`MASS_TOL`]). Signed measures (differences, decomposition parts) share
/// the type with the tag cleared. Equality compares the space and the atoms;
/// the tag is metadata.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    space: StrategySpace,
    atoms: Vec<(StrategyPoint, f64)>,
    probability: bool,
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.atoms == other.atoms
    }
}

/// Measures serialize as their atom list: `[{"coords": [...], "weight": w}]`.
impl Serialize for DiscreteMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct AtomRecord<'a> {
            coords: &'a [f64],
            weight: f64,
        }
        let mut seq = serializer.serialize_seq(Some(self.atoms.len()))?;
        for (point, weight) in &self.atoms {
            seq.serialize_element(&AtomRecord {
                coords: point.coords(),
                weight: *weight,
            })?;
        }
        seq.end()
    }
}

/// Merges coincident atoms, drops negligible ones, sorts lexicographically.
///
/// Merging is greedy in lexicographic order: each atom folds its weight into
/// the first already-accepted atom it coincides with, so chains of nearby
/// atoms cannot drift. The result is idempotent: all surviving atoms are
/// pairwise farther apart than the merge tolerance and carry |weight| at
/// least [`DROP_TOL`].
fn canonical_atoms(mut raw: Vec<(StrategyPoint, f64)>) -> Vec<(StrategyPoint, f64)> {
    raw.sort_by(|a, b| a.0.lex_cmp(&b.0));
    let mut merged: Vec<(StrategyPoint, f64)> = Vec::with_capacity(raw.len());
    for (point, weight) in raw {
        match merged.iter_mut().find(|(rep, _)| rep.coincides(&point)) {
            Some((_, w)) => *w += weight,
            None => merged.push((point, weight)),
        }
    }
    merged.retain(|(_, w)| w.abs() >= DROP_TOL);
    merged.sort_by(|a, b| a.0.lex_cmp(&b.0));
    merged
}

impl DiscreteMeasure {
    /// Builds a signed measure from raw (coordinates, weight) pairs.
    pub fn signed(space: StrategySpace, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut raw = Vec::with_capacity(atoms.len());
        for (coords, weight) in atoms {
            if !weight.is_finite() {
                return Err(Error::NonFinite {
                    index: 0,
                    value: weight,
                });
            }
            raw.push((space.point(coords)?, weight));
        }
        Ok(DiscreteMeasure {
            atoms: canonical_atoms(raw),
            space,
            probability: false,
        })
    }

    /// Builds and validates a probability measure.
    pub fn probability(space: StrategySpace, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut measure = DiscreteMeasure::signed(space, atoms)?;
        for (_, weight) in &measure.atoms {
            if *weight < 0.0 {
                return Err(Error::NegativeWeight { weight: *weight });
            }
        }
        let mass = measure.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized { mass });
        }
        measure.probability = true;
        Ok(measure)
    }

    /// Point mass at one strategy.
    pub fn dirac(space: StrategySpace, coords: Vec<f64>) -> Result<Self> {
        DiscreteMeasure::probability(space, vec![(coords, 1.0)])
    }

    /// Internal constructor for integrator records: atoms are already
    /// canonical (sorted, pairwise distinct) and weights are non-negative,
    /// so no merging happens and tiny weights are preserved to keep the
    /// support of a trajectory intact.
    pub(crate) fn from_canonical_parts(
        space: StrategySpace,
        atoms: Vec<(StrategyPoint, f64)>,
        probability: bool,
    ) -> Self {
        DiscreteMeasure {
            space,
            atoms,
            probability,
        }
    }

    pub fn space(&self) -> &StrategySpace {
        &self.space
    }

    /// Canonical atom list, sorted lexicographically by coordinates.
    pub fn atoms(&self) -> &[(StrategyPoint, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| *w).sum()
    }

    /// Weight carried at a point, matching up to the merge tolerance.
    pub fn weight_at(&self, point: &StrategyPoint) -> Option<f64> {
        self.atoms
            .iter()
            .find(|(p, _)| p.coincides(point))
            .map(|(_, w)| *w)
    }

    /// Re-runs canonicalization. Idempotent: returns an equal measure.
    pub fn canonicalized(&self) -> Self {
        DiscreteMeasure {
            space: self.space.clone(),
            atoms: canonical_atoms(self.atoms.clone()),
            probability: self.probability,
        }
    }

    /// Rescales weights to exact total mass 1.
    pub fn renormalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::NotNormalized { mass });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|(p, w)| (p.clone(), w / mass))
            .collect();
        Ok(DiscreteMeasure {
            space: self.space.clone(),
            atoms: canonical_atoms(atoms),
            probability: self.probability,
        })
    }

    fn check_same_space(&self, other: &DiscreteMeasure) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Signed difference `self − other`.
    pub fn sub(&self, other: &DiscreteMeasure) -> Result<Self> {
        self.check_same_space(other)?;
        let mut raw: Vec<(StrategyPoint, f64)> = self.atoms.clone();
        raw.extend(other.atoms.iter().map(|(p, w)| (p.clone(), -w)));
        Ok(DiscreteMeasure {
            space: self.space.clone(),
            atoms: canonical_atoms(raw),
            probability: false,
        })
    }

    /// Signed sum `self + other`.
    pub fn add(&self, other: &DiscreteMeasure) -> Result<Self> {
        self.check_same_space(other)?;
        let mut raw: Vec<(StrategyPoint, f64)> = self.atoms.clone();
        raw.extend(other.atoms.iter().cloned());
        Ok(DiscreteMeasure {
            space: self.space.clone(),
            atoms: canonical_atoms(raw),
            probability: false,
        })
    }

    /// Variational distance: total weight discrepancy over the union of the
    /// supports. Disjointly supported probability measures are at distance 2.
    pub fn variational_distance(&self, other: &DiscreteMeasure) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.atoms.iter().map(|(_, w)| w.abs()).sum())
    }

    /// Splits `self` into the part supported on `base`'s atoms and the part
    /// disjoint from them. The two parts sum back to `self` atom by atom.
    pub fn lebesgue_decompose(
        &self,
        base: &DiscreteMeasure,
    ) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        self.check_same_space(base)?;
        let mut on_support = Vec::new();
        let mut off_support = Vec::new();
        for (point, weight) in &self.atoms {
            if base.weight_at(point).is_some() {
                on_support.push((point.clone(), *weight));
            } else {
                off_support.push((point.clone(), *weight));
            }
        }
        let wrap = |atoms| DiscreteMeasure {
            space: self.space.clone(),
            atoms,
            probability: false,
        };
        Ok((wrap(on_support), wrap(off_support)))
    }

    /// Whether every atom of `self` is charged by `other`.
    pub fn support_within(&self, other: &DiscreteMeasure) -> bool {
        self.atoms
            .iter()
            .all(|(p, _)| other.weight_at(p).is_some())
    }

    /// Relative entropy `V(Q) = Σⱼ αⱼ ln(αⱼ / Q({xⱼ}))` of `self` (the
    /// target, a probability measure) against `q`.
    ///
    /// Errors with [`Error::AbsoluteContinuityViolated`] if some target atom
    /// carries `q`-weight at or below the positivity floor; a weight that
    /// small signals a degenerate state rather than model behaviour.
    pub fn kl_divergence(&self, q: &DiscreteMeasure) -> Result<f64> {
        self.check_same_space(q)?;
        if !self.probability || !q.probability {
            return Err(Error::NotProbability);
        }
        let mut total = 0.0;
        for (index, (point, alpha)) in self.atoms.iter().enumerate() {
            let beta = q.weight_at(point).unwrap_or(0.0);
            if beta <= KL_FLOOR {
                return Err(Error::AbsoluteContinuityViolated {
                    index,
                    weight: beta,
                });
            }
            total += alpha * (alpha / beta).ln();
        }
        Ok(total)
    }

    /// Both sides of the entropy-distance comparison:
    /// `(‖self − q‖², V(q))`. The classical bound guarantees the left side
    /// is at most twice the right one; the un-factored comparison can fail
    /// and is left to the caller to inspect.
    pub fn pinsker_gap(&self, q: &DiscreteMeasure) -> Result<(f64, f64)> {
        let dist = self.variational_distance(q)?;
        let kl = self.kl_divergence(q)?;
        Ok((dist * dist, kl))
    }
}
