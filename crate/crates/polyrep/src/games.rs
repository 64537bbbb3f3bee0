//! Symmetric two-player games on a strategy box and their payoff functionals.
//!
//! # Mathematical background
//!
//! A game is a bounded payoff kernel u(z, w): the reward to a focal player
//! using strategy z against an opponent drawn at w. For finitely supported
//! population states P, Q the bilinear extension
//!
//! ```text
//! E(P, Q) = Σᵢ Σⱼ pᵢ qⱼ u(zᵢ, wⱼ)
//! ```
//!
//! is the mean payoff of a P-player against a Q-population. Three derived
//! quantities drive the stability theory:
//!
//! * `mean_payoff(z, Q) = E(δ_z, Q)`, the fitness of the pure strategy z,
//! * `success(z, Q) = E(δ_z, Q) − E(Q, Q)`, its relative fitness, which is
//!   the per-atom growth rate of the replicator dynamics, and
//! * `frechet_form(P, Q) = E(Q,Q) − E(P,Q) − E(Q,P) + E(P,P)`, the second
//!   difference of E along the segment from P to Q; a game is negative
//!   definite when this form is bounded above by −c‖Q − P‖².
//!
//! Every kernel carries a declared sup-norm bound. Constructors compute the
//! exact supremum for the analytic variants, and evaluation re-checks the
//! bound opportunistically.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{DiscreteMeasure, StrategyPoint, StrategySpace, MERGE_TOL};

/// The functional form of a payoff kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KernelForm {
    /// `u(z, w) = 2 − ⟨z, w⟩`. A two-atom state balanced on ±1 makes every
    /// strategy indifferent, giving a polymorphic rest point.
    Linear2Mzw,
    /// One-dimensional harvest-timing payoff: `u(z, w) = w` when `z < w`
    /// (the opponent harvests first) and `z − w` otherwise.
    HarvestPiecewise,
    /// `u(z, w) = a + b Σzᵢ + c Σwᵢ + d ⟨z, w⟩`.
    AffineQuadratic { a: f64, b: f64, c: f64, d: f64 },
    /// Payoffs tabulated on a fixed one-dimensional grid; evaluation away
    /// from a grid node is an error, there is no interpolation.
    GridTable {
        grid: Vec<f64>,
        table: Vec<Vec<f64>>,
    },
}

/// A payoff kernel together with its strategy space and sup-norm bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffKernel {
    space: StrategySpace,
    bound: f64,
    form: KernelForm,
}

/// Exact range of `b z + c w + d z w` over one coordinate interval, attained
/// at corners because the term is bilinear in (z, w).
fn coordinate_term_range(lo: f64, hi: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for z in [lo, hi] {
        for w in [lo, hi] {
            let t = b * z + c * w + d * z * w;
            min = min.min(t);
            max = max.max(t);
        }
    }
    (min, max)
}

/// Exact sup-norm of the affine-quadratic family over the box, obtained by
/// summing per-coordinate corner ranges (coordinates enter independently).
fn affine_bound(space: &StrategySpace, a: f64, b: f64, c: f64, d: f64) -> f64 {
    let mut lo = a;
    let mut hi = a;
    for (l, u) in space.lower().iter().zip(space.upper()) {
        let (tmin, tmax) = coordinate_term_range(*l, *u, b, c, d);
        lo += tmin;
        hi += tmax;
    }
    lo.abs().max(hi.abs())
}

fn require_dimension_one(space: &StrategySpace, variant: &'static str) -> Result<()> {
    if space.dimension() != 1 {
        return Err(Error::Validation {
            field: "kernel",
            message: format!("{variant} requires a one-dimensional strategy space"),
        });
    }
    Ok(())
}

impl PayoffKernel {
    /// `u(z, w) = 2 − ⟨z, w⟩` with its exact sup-norm bound (3 on [−1, 1]).
    pub fn linear_2mzw(space: StrategySpace) -> Result<Self> {
        let bound = affine_bound(&space, 2.0, 0.0, 0.0, -1.0);
        Ok(PayoffKernel {
            space,
            bound,
            form: KernelForm::Linear2Mzw,
        })
    }

    /// Harvest-timing kernel; exact bound max(|l|, |u|, u − l) (1 on [0, 1]).
    pub fn harvest_piecewise(space: StrategySpace) -> Result<Self> {
        require_dimension_one(&space, "harvest_piecewise")?;
        let (l, u) = (space.lower()[0], space.upper()[0]);
        let bound = l.abs().max(u.abs()).max(u - l);
        Ok(PayoffKernel {
            space,
            bound,
            form: KernelForm::HarvestPiecewise,
        })
    }

    /// `u(z, w) = a + b Σzᵢ + c Σwᵢ + d ⟨z, w⟩` with its exact bound.
    pub fn affine_quadratic(space: StrategySpace, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for v in [a, b, c, d] {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: 0, value: v });
            }
        }
        let bound = affine_bound(&space, a, b, c, d);
        Ok(PayoffKernel {
            space,
            bound,
            form: KernelForm::AffineQuadratic { a, b, c, d },
        })
    }

    /// Tabulated kernel on a strictly increasing one-dimensional grid whose
    /// nodes all lie in the space; the bound is the table's max magnitude.
    pub fn grid_table(space: StrategySpace, grid: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        require_dimension_one(&space, "grid_table")?;
        if grid.is_empty() {
            return Err(Error::Validation {
                field: "kernel",
                message: "grid must hold at least one node".into(),
            });
        }
        for pair in grid.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Validation {
                    field: "kernel",
                    message: "grid nodes must be strictly increasing".into(),
                });
            }
        }
        for g in &grid {
            if !space.contains(&[*g]) {
                return Err(Error::OutOfSpace { coords: vec![*g] });
            }
        }
        if table.len() != grid.len() || table.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::Validation {
                field: "kernel",
                message: format!("payoff table must be {n} x {n}", n = grid.len()),
            });
        }
        let mut bound: f64 = 0.0;
        for row in &table {
            for v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        index: 0,
                        value: *v,
                    });
                }
                bound = bound.max(v.abs());
            }
        }
        Ok(PayoffKernel {
            space,
            bound,
            form: KernelForm::GridTable { grid, table },
        })
    }

    /// Replaces the computed bound with a larger declared one.
    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !bound.is_finite() || bound < self.bound {
            return Err(Error::BoundTooSmall {
                declared: bound,
                required: self.bound,
            });
        }
        self.bound = bound;
        Ok(self)
    }

    pub fn space(&self) -> &StrategySpace {
        &self.space
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    fn grid_index(grid: &[f64], coord: f64) -> Result<usize> {
        grid.iter()
            .position(|g| (g - coord).abs() <= MERGE_TOL)
            .ok_or(Error::OffGrid { coord })
    }

    /// Payoff to a z-player against a w-player.
    pub fn payoff(&self, z: &StrategyPoint, w: &StrategyPoint) -> Result<f64> {
        if !self.space.contains(z.coords()) {
            return Err(Error::OutOfSpace {
                coords: z.coords().to_vec(),
            });
        }
        if !self.space.contains(w.coords()) {
            return Err(Error::OutOfSpace {
                coords: w.coords().to_vec(),
            });
        }
        let value = match &self.form {
            KernelForm::Linear2Mzw => {
                let dot: f64 = z
                    .coords()
                    .iter()
                    .zip(w.coords())
                    .map(|(a, b)| a * b)
                    .sum();
                2.0 - dot
            }
            KernelForm::HarvestPiecewise => {
                let (z, w) = (z.x(), w.x());
                if z < w {
                    w
                } else {
                    z - w
                }
            }
            KernelForm::AffineQuadratic { a, b, c, d } => {
                let mut value = *a;
                for (zi, wi) in z.coords().iter().zip(w.coords()) {
                    value += b * zi + c * wi + d * zi * wi;
                }
                value
            }
            KernelForm::GridTable { grid, table } => {
                let i = Self::grid_index(grid, z.x())?;
                let j = Self::grid_index(grid, w.x())?;
                table[i][j]
            }
        };
        if value.abs() > self.bound {
            return Err(Error::BoundExceeded {
                value,
                bound: self.bound,
            });
        }
        Ok(value)
    }

    fn check_population(&self, q: &DiscreteMeasure) -> Result<()> {
        if *q.space() != self.space {
            return Err(Error::SpaceMismatch);
        }
        if !q.is_probability() {
            return Err(Error::NotProbability);
        }
        Ok(())
    }

    /// Fitness of the pure strategy z in population q: `E(δ_z, Q)`.
    pub fn mean_payoff(&self, z: &StrategyPoint, q: &DiscreteMeasure) -> Result<f64> {
        self.check_population(q)?;
        let mut total = 0.0;
        for (w, weight) in q.atoms() {
            total += weight * self.payoff(z, w)?;
        }
        Ok(total)
    }

    /// Bilinear payoff `E(P, Q)` of population p against population q.
    pub fn expected_payoff(&self, p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
        self.check_population(p)?;
        let mut total = 0.0;
        for (z, weight) in p.atoms() {
            total += weight * self.mean_payoff(z, q)?;
        }
        Ok(total)
    }

    /// Relative fitness `σ(z, Q) = E(δ_z, Q) − E(Q, Q)`: the growth rate of
    /// the z-atom under the replicator dynamics. Averaging it over Q itself
    /// gives zero.
    pub fn success(&self, z: &StrategyPoint, q: &DiscreteMeasure) -> Result<f64> {
        Ok(self.mean_payoff(z, q)? - self.expected_payoff(q, q)?)
    }

    /// Second difference `E(Q,Q) − E(P,Q) − E(Q,P) + E(P,P)` of the payoff
    /// along the segment from P to Q.
    pub fn frechet_form(&self, p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
        Ok(self.expected_payoff(q, q)? - self.expected_payoff(p, q)?
            - self.expected_payoff(q, p)?
            + self.expected_payoff(p, p)?)
    }
}
