use thiserror::Error;

/// Errors produced by walk construction, evolution and limit computations.
#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid walk configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),

    #[error("rescaling requires a step count n >= 1")]
    ZeroStep,

    #[error("distribution has not been rescaled")]
    NotRescaled,

    #[error("eigenvalues are degenerate at this momentum (min gap {min_gap:e})")]
    Degenerate { min_gap: f64 },

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("momentum grid of {grid} points per axis is too small; need more than {required}")]
    GridTooSmall { grid: usize, required: f64 },

    #[error("quadrature mass {raw_total} deviates from 1 beyond {limit}")]
    MassDeficit { raw_total: f64, limit: f64 },

    #[error("could not draw a nondegenerate momentum after {0} retries")]
    SamplingRetries(usize),

    #[error("{0}")]
    Invalid(String),
}

impl WalkError {
    /// True for failures that come from the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            WalkError::Degenerate { .. }
                | WalkError::NoConvergence
                | WalkError::MassDeficit { .. }
                | WalkError::SamplingRetries(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, WalkError>;
