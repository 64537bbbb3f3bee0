//! Crate-wide error type and result alias.

use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Box bounds have mismatched lengths or a lower bound is not strictly
    /// below its upper bound.
    #[error("invalid box bounds: {0}")]
    InvalidBounds(&'static str),

    /// A point's coordinate vector has the wrong length for its space.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A coordinate is NaN or infinite.
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    /// A point lies outside the strategy space box.
    #[error("point {coords:?} lies outside the strategy space")]
    OutOfSpace { coords: Vec<f64> },

    /// Two operands are declared on different strategy spaces.
    #[error("operands are declared on different strategy spaces")]
    SpaceMismatch,

    /// A probability measure has a negative weight after canonicalization.
    #[error("negative weight {weight} in a probability measure")]
    NegativeWeight { weight: f64 },

    /// A probability measure's total mass is outside the tolerance band.
    #[error("total mass {mass} is not within tolerance of 1")]
    NotNormalized { mass: f64 },

    /// An operation that requires a probability measure received a signed one.
    #[error("operand is not tagged as a probability measure")]
    NotProbability,

    /// A divergence target gives positive weight to a point where the base
    /// measure has none.
    #[error("absolute continuity violated: target atom {index} has base weight {weight:e}")]
    AbsoluteContinuityViolated { index: usize, weight: f64 },

    /// A tabulated kernel was evaluated at a point that is not a grid node.
    #[error("coordinate {coord} is not a grid node")]
    OffGrid { coord: f64 },

    /// A kernel evaluation exceeded the declared payoff bound.
    #[error("payoff {value} exceeds the declared bound {bound}")]
    BoundExceeded { value: f64, bound: f64 },

    /// A declared payoff bound is below the kernel's actual supremum.
    #[error("declared bound {declared} is below the kernel supremum {required}")]
    BoundTooSmall { declared: f64, required: f64 },

    /// The requested step size exceeds the stability cap for the kernel.
    #[error("step size {dt} exceeds the cap {cap} for this kernel")]
    StepSizeTooLarge { dt: f64, cap: f64 },

    /// An integrator step produced a non-positive weight.
    #[error("support lost at step {step}: weight of atom {index} reached {weight:e}")]
    SupportLost { step: usize, index: usize, weight: f64 },

    /// The neighbourhood radius is incompatible with the target's weights.
    #[error("epsilon {epsilon} is not in (0, {limit}) for this target")]
    InvalidEpsilon { epsilon: f64, limit: f64 },

    /// Rejection sampling failed to produce an admissible state.
    #[error("neighbourhood sampling exhausted after {attempts} rejected draws")]
    SamplingExhausted { attempts: usize },

    /// A stability test was invoked on a state that is not a rest point.
    #[error("state is not a rest point: residual {residual:e} exceeds {tol:e}")]
    NotRestPoint { residual: f64, tol: f64 },

    /// A certificate check needs diagnostics the trajectory does not carry.
    #[error("trajectory lacks the diagnostics required by the certificate")]
    MissingDiagnostics,

    /// A scenario document failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A scenario document parsed but violates a cross-field invariant.
    #[error("invalid `{field}`: {message}")]
    Validation { field: &'static str, message: String },

    /// An input or output file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Attaches a path to a raw I/O error.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
