//! Replicator dynamics on finitely supported states.
//!
//! # Mathematical background
//!
//! A finitely supported state `Q(t) = Σⱼ wⱼ(t) δ_{xⱼ}` evolves under the
//! replicator dynamics by growing each atom at its relative fitness:
//!
//! ```text
//! wⱼ'(t) = wⱼ(t) · σ(xⱼ, Q(t)),    σ(z, Q) = E(δ_z, Q) − E(Q, Q).
//! ```
//!
//! The flow preserves the support and the total mass exactly; the solution
//! has the multiplicative form `wⱼ(t) = wⱼ(0) · exp(∫₀ᵗ σ(xⱼ, Q(s)) ds)`,
//! so positive weights stay positive forever.
//!
//! Two fixed-step integrators are provided:
//!
//! * **Exponential**: `wⱼ ← wⱼ · exp(dt σⱼ)`, then renormalize. This
//!   mirrors the multiplicative solution, so positivity and support are
//!   preserved structurally; the scheme is first-order accurate in dt.
//! * **Rk4**: the classical four-stage update applied to the weight vector,
//!   fourth-order accurate, renormalized after each step when the config
//!   asks for it. Renormalization removes the simplex drift that the raw
//!   scheme does not control; the drift removed is recorded per step so it
//!   stays observable.
//!
//! The step size is capped at `0.1 / bound` where `bound` is the kernel's
//! payoff bound: relative fitness is at most `2·bound` in magnitude, so the
//! cap keeps per-step weight changes near 20% and both schemes well inside
//! their stable regime.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::PayoffKernel;
use crate::measures::{DiscreteMeasure, StrategyPoint};

/// Step-size cap factor: dt must not exceed `STEP_CAP_FACTOR / bound`.
pub const STEP_CAP_FACTOR: f64 = 0.1;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Multiplicative update mirroring the closed-form solution.
    Exponential,
    /// Classical fourth-order Runge-Kutta on the weight vector.
    Rk4,
}

/// Fixed-step integration parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size; must be positive and within the kernel's cap.
    pub dt: f64,
    /// Time horizon; rounded to the nearest whole number of steps.
    pub t_end: f64,
    /// Steps between recorded states (the final step is always recorded).
    pub record_every: usize,
    /// Whether the Rk4 scheme renormalizes after each step; the exponential
    /// scheme always does.
    pub renormalize: bool,
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Self {
        IntegratorConfig {
            method,
            dt,
            t_end,
            record_every: 1,
            renormalize: true,
        }
    }

    /// Checks the step size against the kernel's stability cap and the
    /// horizon/stride for basic sanity. Also called by [`integrate`].
    pub fn validate(&self, kernel_bound: f64) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Validation {
                field: "integrator",
                message: format!("step size must be positive, got {}", self.dt),
            });
        }
        if kernel_bound > 0.0 {
            let cap = STEP_CAP_FACTOR / kernel_bound;
            if self.dt > cap {
                return Err(Error::StepSizeTooLarge { dt: self.dt, cap });
            }
        }
        if !self.t_end.is_finite() || self.t_end < self.dt {
            return Err(Error::Validation {
                field: "integrator",
                message: format!(
                    "time horizon {} must be at least one step {}",
                    self.t_end, self.dt
                ),
            });
        }
        if self.record_every == 0 {
            return Err(Error::Validation {
                field: "integrator",
                message: "record stride must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// A recorded orbit of the dynamics.
///
/// States share one atom list (the support of the initial state, which the
/// flow preserves); atoms whose weights decay below the canonical drop
/// tolerance are still kept so that the support stays intact and the
/// entropy diagnostic stays finite. When a target is supplied, `v_values`
/// holds the relative entropy of the target against each recorded state and
/// `distances` the variational distance to the target. `mass_errors` holds
/// the per-step mass drift |Σ wⱼ − 1| measured before renormalization.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DiscreteMeasure>,
    pub v_values: Option<Vec<f64>>,
    pub distances: Option<Vec<f64>>,
    pub mass_errors: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DiscreteMeasure {
        self.states.last().expect("trajectory has at least one record")
    }

    /// Index of the record at time t, matched to 1e-9.
    pub fn index_at_time(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() <= 1e-9)
    }
}

/// Per-atom growth rates `wⱼ σ(xⱼ, Q)` of a state under a kernel. The
/// entries sum to zero: the dynamics conserves mass.
pub fn replicator_rhs(kernel: &PayoffKernel, q: &DiscreteMeasure) -> Result<Vec<f64>> {
    let ee = kernel.expected_payoff(q, q)?;
    q.atoms()
        .iter()
        .map(|(z, w)| Ok(w * (kernel.mean_payoff(z, q)? - ee)))
        .collect()
}

/// Worst deviation of any support atom's fitness from the state's own mean
/// payoff: `max_i |Σⱼ pⱼ u(xᵢ, xⱼ) − E(P, P)|`. Zero exactly at rest
/// points, where every supported strategy earns the same.
pub fn rest_point_residual(kernel: &PayoffKernel, p: &DiscreteMeasure) -> Result<f64> {
    let ee = kernel.expected_payoff(p, p)?;
    let mut residual: f64 = 0.0;
    for (z, _) in p.atoms() {
        let row = kernel.mean_payoff(z, p)?;
        residual = residual.max((row - ee).abs());
    }
    Ok(residual)
}

/// Dense pairwise payoff matrix over a fixed atom list, so that each
/// integration step costs one matrix-vector product instead of fresh kernel
/// dispatches.
struct PayoffMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    fn build(kernel: &PayoffKernel, atoms: &[(StrategyPoint, f64)]) -> Result<Self> {
        let n = atoms.len();
        let mut entries = Vec::with_capacity(n * n);
        for (zi, _) in atoms {
            for (zj, _) in atoms {
                entries.push(kernel.payoff(zi, zj)?);
            }
        }
        Ok(PayoffMatrix { n, entries })
    }

    /// Relative fitness of each atom in the population with weights `w`.
    fn sigma(&self, w: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(w).map(|(u, wj)| u * wj).sum();
        }
        let ee: f64 = w.iter().zip(out.iter()).map(|(wi, mi)| wi * mi).sum();
        for m in out.iter_mut() {
            *m -= ee;
        }
    }

    /// Replicator vector field extended to raw weight vectors.
    fn rhs(&self, w: &[f64], out: &mut [f64]) {
        self.sigma(w, out);
        for (d, wi) in out.iter_mut().zip(w) {
            *d *= wi;
        }
    }
}

/// Integrates the replicator dynamics from `q0` with fixed steps.
///
/// The horizon is rounded to the nearest whole number of steps. Records are
/// taken at the initial state, every `record_every` steps, and at the final
/// step. When `target` is given, its support must be contained in the
/// support of `q0`, and each record carries the relative entropy of the
/// target against the state and the variational distance to the target.
pub fn integrate(
    kernel: &PayoffKernel,
    q0: &DiscreteMeasure,
    cfg: &IntegratorConfig,
    target: Option<&DiscreteMeasure>,
) -> Result<Trajectory> {
    if q0.space() != kernel.space() {
        return Err(Error::SpaceMismatch);
    }
    if !q0.is_probability() || q0.is_empty() {
        return Err(Error::NotProbability);
    }
    cfg.validate(kernel.bound())?;
    if let Some(p) = target {
        if p.space() != kernel.space() {
            return Err(Error::SpaceMismatch);
        }
        if !p.is_probability() {
            return Err(Error::NotProbability);
        }
        if !p.support_within(q0) {
            return Err(Error::Validation {
                field: "target",
                message: "target support must be contained in the initial support".into(),
            });
        }
    }

    let atoms: Vec<(StrategyPoint, f64)> = q0.atoms().to_vec();
    let n = atoms.len();
    let matrix = PayoffMatrix::build(kernel, &atoms)?;
    let mut w: Vec<f64> = atoms.iter().map(|(_, weight)| *weight).collect();

    let n_steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut mass_errors = Vec::new();
    let mut v_values = target.map(|_| Vec::new());
    let mut distances = target.map(|_| Vec::new());

    let record = |step: usize,
                      w: &[f64],
                      drift: f64,
                      states: &mut Vec<DiscreteMeasure>,
                      times: &mut Vec<f64>,
                      mass_errors: &mut Vec<f64>,
                      v_values: &mut Option<Vec<f64>>,
                      distances: &mut Option<Vec<f64>>|
     -> Result<()> {
        let state_atoms: Vec<(StrategyPoint, f64)> = atoms
            .iter()
            .zip(w)
            .map(|((p, _), weight)| (p.clone(), *weight))
            .collect();
        let state =
            DiscreteMeasure::from_canonical_parts(kernel.space().clone(), state_atoms, true);
        if let Some(p) = target {
            v_values.as_mut().unwrap().push(p.kl_divergence(&state)?);
            distances
                .as_mut()
                .unwrap()
                .push(p.variational_distance(&state)?);
        }
        times.push(step as f64 * cfg.dt);
        states.push(state);
        mass_errors.push(drift);
        Ok(())
    };

    let initial_drift = (w.iter().sum::<f64>() - 1.0).abs();
    record(
        0,
        &w,
        initial_drift,
        &mut states,
        &mut times,
        &mut mass_errors,
        &mut v_values,
        &mut distances,
    )?;

    let mut sigma = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    for step in 1..=n_steps {
        match cfg.method {
            Method::Exponential => {
                matrix.sigma(&w, &mut sigma);
                for (wi, s) in w.iter_mut().zip(&sigma) {
                    *wi *= (cfg.dt * s).exp();
                }
            }
            Method::Rk4 => {
                matrix.rhs(&w, &mut k1);
                for i in 0..n {
                    stage[i] = w[i] + 0.5 * cfg.dt * k1[i];
                }
                matrix.rhs(&stage, &mut k2);
                for i in 0..n {
                    stage[i] = w[i] + 0.5 * cfg.dt * k2[i];
                }
                matrix.rhs(&stage, &mut k3);
                for i in 0..n {
                    stage[i] = w[i] + cfg.dt * k3[i];
                }
                matrix.rhs(&stage, &mut k4);
                for i in 0..n {
                    w[i] += cfg.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }

        let mass: f64 = w.iter().sum();
        let drift = (mass - 1.0).abs();
        for (index, wi) in w.iter().enumerate() {
            if !(*wi > 0.0) {
                return Err(Error::SupportLost {
                    step,
                    index,
                    weight: *wi,
                });
            }
        }
        if cfg.method == Method::Exponential || cfg.renormalize {
            for wi in w.iter_mut() {
                *wi /= mass;
            }
        }

        if step % cfg.record_every == 0 || step == n_steps {
            record(
                step,
                &w,
                drift,
                &mut states,
                &mut times,
                &mut mass_errors,
                &mut v_values,
                &mut distances,
            )?;
        }
    }

    Ok(Trajectory {
        times,
        states,
        v_values,
        distances,
        mass_errors,
    })
}
