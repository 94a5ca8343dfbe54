use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: pivot {magnitude:e} at row {row} (threshold {threshold:e})")]
    SingularSystem {
        row: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("adaptive quadrature hit its depth limit (best estimate {estimate:e})")]
    DepthExceeded { estimate: f64 },

    #[error("grid too coarse: t = {t} must exceed 2(E - V) = {limit}")]
    PreconditionViolated { t: f64, limit: f64 },

    #[error("boundary coefficient denominator t + 2(E - V) vanishes")]
    DegenerateDenominator,

    #[error("energy {energy} eV is below the injecting contact band edge {band_edge} eV")]
    NotPropagating { energy: f64, band_edge: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (last update {last_update:e})")]
    MaxIterationsExceeded {
        iterations: usize,
        last_update: f64,
        history: Vec<f64>,
        /// Iterate with the smallest residual.
        best: Vec<f64>,
    },

    #[error("self-consistent loop did not converge in {iterations} outer steps (last update {last_update:e})")]
    OuterMaxIterations {
        iterations: usize,
        last_update: f64,
        history: Vec<f64>,
        /// Last potential `V_s` on nodes `0..=N_x`.
        last: Vec<f64>,
    },

    #[error("outer iteration {iteration}: {source}")]
    Outer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularSystem { .. } => "singular_system",
            Error::InvalidSystem(_) => "invalid_system",
            Error::DepthExceeded { .. } => "depth_exceeded",
            Error::PreconditionViolated { .. } => "precondition_violated",
            Error::DegenerateDenominator => "degenerate_denominator",
            Error::NotPropagating { .. } => "not_propagating",
            Error::MaxIterationsExceeded { .. } => "max_iterations_exceeded",
            Error::OuterMaxIterations { .. } => "outer_max_iterations",
            Error::Outer { source, .. } => source.kind(),
            Error::UnknownPreset(_) => "unknown_preset",
            Error::Parse { .. } => "parse_error",
            Error::Validation { .. } => "validation_error",
            Error::Io(_) => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}
