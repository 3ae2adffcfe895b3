use thiserror::Error;

/// Errors produced by the numerical kernels and model builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("step-size error: {0}")]
    Step(String),

    #[error("objective returned {value} at {point:?}")]
    Objective { point: Vec<f64>, value: f64 },
}

impl Error {
    /// True for failures that come from the numerics rather than from bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Objective { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
