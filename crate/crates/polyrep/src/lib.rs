//! Replicator dynamics and stability certification for finitely supported
//! population states in continuous games.
//!
//! The crate models populations over a compact strategy box as finitely
//! supported probability measures, evolves them under the replicator
//! dynamics induced by a bounded payoff kernel, and certifies the stability
//! of polymorphic rest points three ways: by sampling neighbourhood states
//! and measuring invasion margins, by estimating a negative-definiteness
//! constant for the payoff's second difference, and by checking a
//! relative-entropy Lyapunov certificate along simulated trajectories.
//!
//! The `polyrep` binary drives the same machinery from scenario documents;
//! see the repository README for the document grammar and report schema.

#![forbid(unsafe_code)]

pub mod dynamics;
pub mod error;
pub mod games;
pub mod measures;
pub mod scenario;
pub mod stability;

pub use dynamics::{integrate, replicator_rhs, rest_point_residual, IntegratorConfig, Method, Trajectory};
pub use error::{Error, Result};
pub use games::{KernelForm, PayoffKernel};
pub use measures::{DiscreteMeasure, StrategyPoint, StrategySpace};
pub use scenario::{
    parse_scenario, run_scenario, serialize_scenario, Analysis, RunReport, ScenarioConfig,
};
pub use stability::{
    basin_probe, estimate_negdef_constant, invasion_margin, negdef_ratio, sample_neighborhood,
    test_strong_uninvadability, test_strong_unbeatability, verify_lyapunov_certificate,
    BasinReport, CertificateReport, MarginReport, NegdefReport, NeighborhoodSpec,
};
