use thiserror::Error;

/// Errors raised by the estimation, solver and projection routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Event counts leave a required denominator empty.
    #[error("degenerate counts: {0}")]
    DegenerateCounts(String),

    /// The bias-inflated event fraction cannot be produced by any finite hazard.
    #[error(
        "no effective hazard ratio exists: target event fraction {target:.6} \
         is not below the attainable supremum {supremum:.6}"
    )]
    NoSolution { target: f64, supremum: f64 },

    /// Newton iteration and the bisection fallback both failed.
    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// Failure inside one stage of the projection pipeline.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with pipeline stage context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for solver failures (no solution or non-convergence).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::NoSolution { .. } | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
