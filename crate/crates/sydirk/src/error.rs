//! Error type shared across the crate.

/// Errors produced by tableau construction, stage solvers, and the matrix
/// splitting machinery.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A SyDIRK weight vector contained a zero entry. Stages with zero weight
    /// have no effect on the step and are rejected rather than silently
    /// removed.
    #[error("stage weight b[{index}] is zero; SyDIRK weights must be nonzero")]
    ZeroWeight { index: usize },

    /// Unknown built-in tableau name.
    #[error("unknown tableau name `{0}`")]
    UnknownName(String),

    /// The stage dependency relation contains a cycle even though the
    /// projectability residual passed; the classification tolerance is too
    /// loose for this tableau.
    #[error("stage ordering relation has a cycle through stages {cycle:?}; tolerance too loose")]
    OrderCycle { cycle: Vec<usize> },

    /// An implicit stage equation did not converge.
    #[error("stage {stage} did not converge after {iters} iterations (residual {residual:.3e})")]
    NonConvergence {
        stage: usize,
        iters: usize,
        residual: f64,
    },

    /// Operand dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A coefficient or state entry is NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// The tableau does not satisfy the symplecticity coefficient condition,
    /// so the quadratic-observable update formula does not apply.
    #[error(
        "tableau is not quadratic functionally equivariant (symplectic residual {residual:.3e})"
    )]
    NotEquivariant { residual: f64 },

    /// The eigenvalue structure required by the L/P splitting is absent
    /// (repeated or near-zero eigenvalues).
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// A Cayley-transform factor `I -/+ rho` is numerically singular.
    #[error("stage {stage}: Cayley factor is numerically singular")]
    SingularFactor { stage: usize },

    /// Input matrix was expected to be anti-Hermitian.
    #[error("matrix is not anti-Hermitian (deviation {deviation:.3e})")]
    NotAntiHermitian { deviation: f64 },

    /// Wraps an error with the trajectory step at which it occurred.
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a trajectory step index to an error.
    pub fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// The step index attached by [`Error::at_step`], if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }

    /// The underlying error with any step wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
