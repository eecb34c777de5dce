use thiserror::Error;

/// Errors raised by the jet, curvature and Monte Carlo routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("reparametrization is not invertible: leading coefficient is zero")]
    NonInvertible,

    #[error("series has vanishing first coefficient; compositional inverse undefined")]
    VanishingLinearTerm,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("jet order {0} outside 1..={1}")]
    OrderOutOfRange(usize, usize),

    #[error("first coordinate of the jet is not immersive (xi[1][1] = 0); normalization undefined")]
    DegenerateNormalization,

    #[error("vector is not a unit vector (norm {0})")]
    NonUnitVector(f64),

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("numerical overflow guard: {0}")]
    Overflow(String),

    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid sampling request: {0}")]
    InvalidSampling(String),

    #[error("vanishing jet row {0}")]
    VanishingRow(usize),
}

impl Error {
    /// True for conditions that come from numerical guards (overflow,
    /// degeneracy) rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonInvertible
                | Error::VanishingLinearTerm
                | Error::DegenerateNormalization
                | Error::Overflow(_)
                | Error::CapExceeded(_)
                | Error::VanishingRow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
