//! Static stability testers and the empirical Lyapunov certificate.
//!
//! A finitely supported rest point `P* = Σ αⱼ δ_{xⱼ}` is probed through
//! random states drawn from the variational ball `‖Q − P*‖ < ε`. Each probe
//! keeps every atom of `P*` (guaranteed whenever `ε < 2 minⱼ αⱼ`) and may
//! add a small "mutant" component supported on a grid of off-support
//! strategies. Three static tests run over such samples:
//!
//! * invasion margins `E(P*, Q) − E(Q, Q)`, whose sign distinguishes states
//!   that cannot be invaded (margin strictly positive) from states that are
//!   merely never beaten (margin non-negative);
//! * the negative-definiteness ratio `−B(Q − P*, Q − P*) / ‖Q − P*‖²` of
//!   the kernel's symmetrized quadratic form, whose infimum is the constant
//!   `c` in the bound `B(Q − P*, Q − P*) ≤ −c ‖Q − P*‖²`;
//! * a dynamic certificate over recorded trajectories: the relative entropy
//!   `V(Q) = Σ αⱼ ln(αⱼ / Q{xⱼ})` must be non-negative, vanish at the
//!   target, dominate `‖Q − P*‖² / 2`, and be non-increasing from record to
//!   record.
//!
//! All verdicts are *empirical*: a finite sample can exhibit a
//! counterexample but can never prove a universally quantified property.
//! Reports carry the tolerances they were judged against and are
//! deterministic functions of the inputs and the sampling seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{integrate, rest_point_residual, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::games::PayoffKernel;
use crate::measures::{DiscreteMeasure, StrategyPoint, MERGE_TOL};

/// Largest rest-point residual accepted before a stability test runs.
pub const REST_TOL: f64 = 1e-10;

/// Margin tolerance separating true zeros from accumulated rounding noise.
pub const MARGIN_TOL: f64 = 1e-10;

/// Threshold on the estimated negative-definiteness constant.
pub const C_TOL: f64 = 1e-8;

/// Slack for non-negativity and target-equality checks on the entropy.
pub const CERT_NONNEG_SLACK: f64 = 1e-12;

/// Slack for the entropy-versus-distance comparison and the record-to-record
/// monotonicity check.
pub const CERT_COMPARISON_SLACK: f64 = 1e-9;

/// Samples closer to the target than this are skipped by the ratio
/// estimator: the quotient is numerically meaningless there.
const RATIO_DISTANCE_FLOOR: f64 = 1e-9;

/// Consecutive rejected draws tolerated before sampling gives up.
const MAX_REJECTIONS: usize = 1000;

/// Label attached to every sampled verdict.
const EMPIRICAL: &str = "empirical";

/// How a random state in the variational ball around a target is drawn.
///
/// The invariant `epsilon < 2 minⱼ αⱼ` guarantees that every state in the
/// ball keeps the full support of the target, so perturbed weights stay
/// strictly positive by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborhoodSpec {
    /// Radius of the variational ball around the target.
    pub epsilon: f64,
    /// Number of states to draw.
    pub n_samples: usize,
    /// Number of equispaced off-support grid points available to the
    /// mutant component.
    pub mutant_grid: usize,
    /// Seed of the deterministic generator.
    pub seed: u64,
}

impl NeighborhoodSpec {
    pub fn new(epsilon: f64, n_samples: usize, mutant_grid: usize, seed: u64) -> Self {
        NeighborhoodSpec {
            epsilon,
            n_samples,
            mutant_grid,
            seed,
        }
    }

    /// Checks these sampling parameters against the target they will
    /// sample around.
    pub fn validate_for(&self, pstar: &DiscreteMeasure) -> Result<()> {
        if !pstar.is_probability() || pstar.is_empty() {
            return Err(Error::NotProbability);
        }
        let min_alpha = pstar
            .atoms()
            .iter()
            .map(|(_, w)| *w)
            .fold(f64::INFINITY, f64::min);
        let limit = 2.0 * min_alpha;
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 || self.epsilon >= limit {
            return Err(Error::InvalidEpsilon {
                epsilon: self.epsilon,
                limit,
            });
        }
        if self.mutant_grid == 0 {
            return Err(Error::Validation {
                field: "neighborhood",
                message: "mutant grid needs at least one point".into(),
            });
        }
        Ok(())
    }
}

/// Equispaced interior points `lower + (upper − lower) · i / (g + 1)` along
/// the diagonal of the box, with points that coincide with an atom of the
/// target removed.
fn off_support_grid(pstar: &DiscreteMeasure, g: usize) -> Result<Vec<StrategyPoint>> {
    let space = pstar.space();
    let mut grid = Vec::with_capacity(g);
    for i in 1..=g {
        let frac = i as f64 / (g + 1) as f64;
        let coords: Vec<f64> = space
            .lower()
            .iter()
            .zip(space.upper())
            .map(|(lo, hi)| lo + (hi - lo) * frac)
            .collect();
        let point = space.point(coords)?;
        let taken = pstar
            .atoms()
            .iter()
            .any(|(x, _)| x.max_norm_distance(&point) <= MERGE_TOL);
        if !taken {
            grid.push(point);
        }
    }
    Ok(grid)
}

/// One candidate state: target weights perturbed uniformly within
/// `±ε / (2k)`, plus a mutant mass uniform on `[0, ε/4]` spread over the
/// grid with symmetric-Dirichlet proportions, everything renormalized.
fn draw_candidate(
    pstar: &DiscreteMeasure,
    grid: &[StrategyPoint],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DiscreteMeasure> {
    let k = pstar.len() as f64;
    let half_width = epsilon / (2.0 * k);
    let mut raw: Vec<(Vec<f64>, f64)> = Vec::with_capacity(pstar.len() + grid.len());
    for (point, alpha) in pstar.atoms() {
        let delta = (2.0 * rng.gen::<f64>() - 1.0) * half_width;
        raw.push((point.coords().to_vec(), alpha + delta));
    }
    if !grid.is_empty() {
        let mass = rng.gen::<f64>() * epsilon / 4.0;
        let shares: Vec<f64> = grid
            .iter()
            .map(|_| -f64::ln_1p(-rng.gen::<f64>()))
            .collect();
        let total: f64 = shares.iter().sum();
        if total > 0.0 {
            for (point, share) in grid.iter().zip(&shares) {
                raw.push((point.coords().to_vec(), mass * share / total));
            }
        }
    }
    let sum: f64 = raw.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut raw {
        *w /= sum;
    }
    DiscreteMeasure::probability(pstar.space().clone(), raw)
}

/// Draws `n_samples` probability states inside the variational ball of
/// radius `epsilon` around the target, each keeping the target's support.
///
/// Candidates outside the ball are rejected and redrawn; more than 1000
/// consecutive rejections abort the run. The output is a deterministic
/// function of the target and the sampling parameters.
pub fn sample_neighborhood(
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
) -> Result<Vec<DiscreteMeasure>> {
    spec.validate_for(pstar)?;
    let grid = off_support_grid(pstar, spec.mutant_grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::with_capacity(spec.n_samples);
    while samples.len() < spec.n_samples {
        let mut rejections = 0usize;
        loop {
            let candidate = draw_candidate(pstar, &grid, spec.epsilon, &mut rng)?;
            if candidate.variational_distance(pstar)? < spec.epsilon {
                samples.push(candidate);
                break;
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::SamplingExhausted {
                    attempts: MAX_REJECTIONS,
                });
            }
        }
    }
    Ok(samples)
}

/// Margin `E(P*, Q) − E(Q, Q)` of the incumbent against one challenger.
pub fn invasion_margin(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    q: &DiscreteMeasure,
) -> Result<f64> {
    Ok(kernel.expected_payoff(pstar, q)? - kernel.expected_payoff(q, q)?)
}

/// Ratio `−B(Q − P*, Q − P*) / ‖Q − P*‖²` of the symmetrized quadratic form
/// against the squared variational distance. `None` when the two states are
/// too close for the quotient to mean anything.
pub fn negdef_ratio(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    q: &DiscreteMeasure,
) -> Result<Option<f64>> {
    let dist = q.variational_distance(pstar)?;
    if dist < RATIO_DISTANCE_FLOOR {
        return Ok(None);
    }
    Ok(Some(-kernel.frechet_form(pstar, q)? / (dist * dist)))
}

/// Rejects targets that are not rest points before a stability test runs.
fn rest_point_gate(kernel: &PayoffKernel, pstar: &DiscreteMeasure) -> Result<f64> {
    let residual = rest_point_residual(kernel, pstar)?;
    if residual > REST_TOL {
        return Err(Error::NotRestPoint {
            residual,
            tol: REST_TOL,
        });
    }
    Ok(residual)
}

/// Outcome of a sampled margin survey.
#[derive(Debug, Clone, Serialize)]
pub struct MarginReport {
    /// Which criterion the verdict refers to: `"uninvadable"` requires a
    /// strictly positive minimum margin, `"unbeatable"` only a non-negative
    /// one.
    pub criterion: &'static str,
    /// Rest-point residual of the target, always within [`REST_TOL`].
    pub rest_residual: f64,
    pub n_samples: usize,
    /// Smallest margin over the samples; absent when nothing was sampled.
    pub min_margin: Option<f64>,
    /// The sample attaining the smallest margin.
    pub argmin_sample: Option<DiscreteMeasure>,
    pub margin_tol: f64,
    /// Positive verdict for `min_margin > margin_tol` (uninvadable) or
    /// `min_margin ≥ −margin_tol` (unbeatable); an empty survey never
    /// certifies anything.
    pub verdict: bool,
    /// Always `"empirical"`: sampling exhibits counterexamples, it does not
    /// prove their absence.
    pub basis: &'static str,
}

fn margin_survey(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
    criterion: &'static str,
    strict: bool,
) -> Result<MarginReport> {
    let rest_residual = rest_point_gate(kernel, pstar)?;
    let samples = sample_neighborhood(pstar, spec)?;
    let mut min_margin: Option<f64> = None;
    let mut argmin: Option<&DiscreteMeasure> = None;
    for q in &samples {
        let margin = invasion_margin(kernel, pstar, q)?;
        if min_margin.map_or(true, |m| margin < m) {
            min_margin = Some(margin);
            argmin = Some(q);
        }
    }
    let verdict = match min_margin {
        Some(m) if strict => m > MARGIN_TOL,
        Some(m) => m >= -MARGIN_TOL,
        None => false,
    };
    Ok(MarginReport {
        criterion,
        rest_residual,
        n_samples: samples.len(),
        min_margin,
        argmin_sample: argmin.cloned(),
        margin_tol: MARGIN_TOL,
        verdict,
        basis: EMPIRICAL,
    })
}

/// Surveys invasion margins around a rest point and certifies (empirically)
/// that no sampled challenger matches the incumbent: verdict positive iff
/// the smallest margin exceeds [`MARGIN_TOL`].
pub fn test_strong_uninvadability(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
) -> Result<MarginReport> {
    margin_survey(kernel, pstar, spec, "uninvadable", true)
}

/// Surveys invasion margins around a rest point and certifies (empirically)
/// that no sampled challenger beats the incumbent: verdict positive iff the
/// smallest margin is at least `−`[`MARGIN_TOL`].
pub fn test_strong_unbeatability(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
) -> Result<MarginReport> {
    margin_survey(kernel, pstar, spec, "unbeatable", false)
}

/// Outcome of the negative-definiteness estimation.
#[derive(Debug, Clone, Serialize)]
pub struct NegdefReport {
    /// Rest-point residual of the target, always within [`REST_TOL`].
    pub rest_residual: f64,
    /// Number of random samples drawn (the designated witness, if any, is
    /// evaluated in addition to these).
    pub n_samples: usize,
    /// States (samples or witness) skipped because they sit closer to the
    /// target than the ratio estimator can resolve.
    pub n_skipped: usize,
    /// Smallest observed ratio; absent when every state was skipped.
    pub c_estimate: Option<f64>,
    /// The state attaining the smallest ratio.
    pub worst_sample: Option<DiscreteMeasure>,
    /// Ratio of the designated witness, when one was supplied and resolvable.
    pub witness_ratio: Option<f64>,
    pub c_tol: f64,
    /// Positive verdict iff `c_estimate > c_tol`: the quadratic form looked
    /// negative definite on everything sampled.
    pub verdict: bool,
    /// Always `"empirical"`.
    pub basis: &'static str,
}

/// Estimates the negative-definiteness constant `c` as the smallest ratio
/// `−B(Q − P*, Q − P*) / ‖Q − P*‖²` over sampled states, optionally joined
/// by a designated witness state evaluated alongside the random draws.
pub fn estimate_negdef_constant(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
    witness: Option<&DiscreteMeasure>,
) -> Result<NegdefReport> {
    let rest_residual = rest_point_gate(kernel, pstar)?;
    let samples = sample_neighborhood(pstar, spec)?;
    let mut n_skipped = 0usize;
    let mut c_estimate: Option<f64> = None;
    let mut worst: Option<&DiscreteMeasure> = None;
    let mut witness_ratio: Option<f64> = None;
    for (q, is_witness) in samples
        .iter()
        .map(|q| (q, false))
        .chain(witness.map(|q| (q, true)))
    {
        match negdef_ratio(kernel, pstar, q)? {
            None => n_skipped += 1,
            Some(ratio) => {
                if is_witness {
                    witness_ratio = Some(ratio);
                }
                if c_estimate.map_or(true, |c| ratio < c) {
                    c_estimate = Some(ratio);
                    worst = Some(q);
                }
            }
        }
    }
    let verdict = c_estimate.map_or(false, |c| c > C_TOL);
    Ok(NegdefReport {
        rest_residual,
        n_samples: samples.len(),
        n_skipped,
        c_estimate,
        worst_sample: worst.cloned(),
        witness_ratio,
        c_tol: C_TOL,
        verdict,
        basis: EMPIRICAL,
    })
}

/// Outcome of the entropy-certificate checks over recorded trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub n_trajectories: usize,
    /// Total number of records inspected.
    pub n_records: usize,
    /// Every recorded entropy is at least `−`[`CERT_NONNEG_SLACK`].
    pub v_nonneg: bool,
    /// The entropy vanishes (within slack) at records indistinguishable
    /// from the target.
    pub v_zero_at_target: bool,
    /// `‖Q − P*‖² / 2 ≤ V + slack` held at every record.
    pub pinsker_factor2: bool,
    /// Fraction of consecutive record pairs with non-increasing entropy
    /// (up to [`CERT_COMPARISON_SLACK`]).
    pub monotone_fraction: f64,
    /// Fraction of consecutive record pairs with strictly decreasing
    /// entropy, reported separately: strict decrease away from the target
    /// is what upgrades plain stability to attraction.
    pub strict_fraction: f64,
    /// All flags hold and every pair was monotone.
    pub verdict: bool,
    /// The one condition of the underlying theory that has no
    /// finite-sample analogue; recorded here so the report is explicit
    /// about what was not checked.
    pub omitted_condition: &'static str,
}

/// See [`CertificateReport::omitted_condition`].
pub const OMITTED_CONDITION: &str = "the asymptotic limit-interchange condition cannot be \
     checked from finitely many records and is omitted";

/// Checks the entropy certificate on trajectories that were integrated with
/// the target attached: non-negativity, vanishing at the target, domination
/// of half the squared distance, and record-to-record monotonicity.
///
/// Trajectories lacking the entropy or distance channel are rejected with
/// [`Error::MissingDiagnostics`]. With no records the checks hold vacuously.
pub fn verify_lyapunov_certificate(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    trajectories: &[Trajectory],
) -> Result<CertificateReport> {
    if !pstar.is_probability() || pstar.is_empty() {
        return Err(Error::NotProbability);
    }
    if pstar.space() != kernel.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut n_records = 0usize;
    let mut v_nonneg = true;
    let mut v_zero_at_target = true;
    let mut pinsker_factor2 = true;
    let mut pairs = 0usize;
    let mut monotone = 0usize;
    let mut strict = 0usize;
    for trajectory in trajectories {
        let vs = trajectory
            .v_values
            .as_ref()
            .ok_or(Error::MissingDiagnostics)?;
        let ds = trajectory
            .distances
            .as_ref()
            .ok_or(Error::MissingDiagnostics)?;
        if let Some(state) = trajectory.states.first() {
            if state.space() != kernel.space() {
                return Err(Error::SpaceMismatch);
            }
        }
        n_records += vs.len();
        for (v, d) in vs.iter().zip(ds) {
            if *v < -CERT_NONNEG_SLACK {
                v_nonneg = false;
            }
            if *d <= CERT_NONNEG_SLACK && *v > CERT_NONNEG_SLACK {
                v_zero_at_target = false;
            }
            if d * d / 2.0 > v + CERT_COMPARISON_SLACK {
                pinsker_factor2 = false;
            }
        }
        for pair in vs.windows(2) {
            pairs += 1;
            if pair[1] <= pair[0] + CERT_COMPARISON_SLACK {
                monotone += 1;
            }
            if pair[1] < pair[0] {
                strict += 1;
            }
        }
    }
    let monotone_fraction = if pairs == 0 {
        1.0
    } else {
        monotone as f64 / pairs as f64
    };
    let strict_fraction = if pairs == 0 {
        0.0
    } else {
        strict as f64 / pairs as f64
    };
    let verdict = v_nonneg && v_zero_at_target && pinsker_factor2 && monotone == pairs;
    Ok(CertificateReport {
        n_trajectories: trajectories.len(),
        n_records,
        v_nonneg,
        v_zero_at_target,
        pinsker_factor2,
        monotone_fraction,
        strict_fraction,
        verdict,
        omitted_condition: OMITTED_CONDITION,
    })
}

/// Summary of the basin probe; the underlying trajectories are returned
/// alongside so callers can feed them to the certificate checker or on to
/// disk.
#[derive(Debug, Clone, Serialize)]
pub struct BasinReport {
    pub n_runs: usize,
    /// Largest distance to the target over all runs and all records.
    pub max_excursion: f64,
    pub final_distance_max: f64,
    pub final_distance_mean: f64,
}

/// Integrates the dynamics from each sampled state in the ball around the
/// rest point, recording how far trajectories stray and where they end.
pub fn basin_probe(
    kernel: &PayoffKernel,
    pstar: &DiscreteMeasure,
    spec: &NeighborhoodSpec,
    cfg: &IntegratorConfig,
) -> Result<(BasinReport, Vec<Trajectory>)> {
    rest_point_gate(kernel, pstar)?;
    let samples = sample_neighborhood(pstar, spec)?;
    let mut trajectories = Vec::with_capacity(samples.len());
    let mut max_excursion = 0.0f64;
    let mut final_distance_max = 0.0f64;
    let mut final_sum = 0.0f64;
    for q0 in &samples {
        let trajectory = integrate(kernel, q0, cfg, Some(pstar))?;
        let ds = trajectory
            .distances
            .as_ref()
            .expect("integration with a target records distances");
        let run_max = ds.iter().fold(0.0f64, |m, d| m.max(*d));
        let last = *ds.last().expect("a trajectory has at least one record");
        max_excursion = max_excursion.max(run_max);
        final_distance_max = final_distance_max.max(last);
        final_sum += last;
        trajectories.push(trajectory);
    }
    let n_runs = trajectories.len();
    let final_distance_mean = if n_runs == 0 {
        0.0
    } else {
        final_sum / n_runs as f64
    };
    Ok((
        BasinReport {
            n_runs,
            max_excursion,
            final_distance_max,
            final_distance_mean,
        },
        trajectories,
    ))
}
