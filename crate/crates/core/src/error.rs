use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is invalid: n_points must be a power of two and at least 8")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} points vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("field has {got} samples but the grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFiniteInput(usize),

    #[error("coefficients violate conjugate symmetry at k = {k} (defect {defect:e})")]
    AsymmetricCoefficients { k: i64, defect: f64 },

    #[error("invalid model parameter `{key}`: {reason}")]
    InvalidParams { key: &'static str, reason: String },

    #[error("invalid solver setting `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("non-finite state at t = {t}: discrete solution blew up")]
    NonFiniteState { t: f64 },

    #[error(
        "Picard iteration failed to contract at t = {t} after {iterations} iterations \
         (last ratio {last_ratio:.4}); dt is too large relative to the local time"
    )]
    NonContraction {
        t: f64,
        iterations: usize,
        last_ratio: f64,
    },

    #[error("Picard step dt = {dt} violates the contraction guard dt < T'/2 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("forcing field is only valid on [{start}, {end}], requested t = {t}")]
    ForcingOutOfRange { t: f64, start: f64, end: f64 },

    #[error("probe precondition violated: {0}")]
    Probe(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

impl Error {
    /// Whether the failure comes from the numerics rather than from user input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. }
                | Error::NonContraction { .. }
                | Error::StepTooLarge { .. }
        )
    }

    /// Process exit status for the command-line tool: 1 for I/O, 3 for numerical failure,
    /// 2 for everything rejected as bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            e if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
