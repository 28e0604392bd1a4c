use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point} outside domain [{lo}, {hi}]")]
    Domain { point: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameter {name} = {value:?}: {constraint}")]
    Parameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("non-finite value at {at}: {detail}")]
    Evaluation { at: String, detail: String },

    #[error("singular rank-one update at step {step}: denominator {value:e}")]
    SingularUpdate { step: usize, value: f64 },

    #[error("range violation at stage {stage}, entry ({i}, {j}): {detail}")]
    Range {
        stage: usize,
        i: usize,
        j: usize,
        detail: String,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Validation-class failures (bad input or parameters) versus numerical ones.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Input(_) | Error::Parameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, value: f64, constraint: &'static str) -> Error {
    Error::Parameter {
        name,
        value,
        constraint,
    }
}
