//! Error type shared across the crate, plus the process exit-code mapping
//! used by the `altilink` binary.

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver failed to bracket or converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A quadrature result did not stabilize under order refinement.
    #[error("quadrature did not stabilize: {0}")]
    Quadrature(String),

    /// Scenario file syntax error.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Scenario value outside its allowed range.
    #[error("value out of range for `{key}`: {msg}")]
    Range { key: String, msg: String },

    /// A required scenario section is absent.
    #[error("missing section [{0}]")]
    MissingSection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// The analytic-vs-simulation gate tripped (some |z| above the hard limit).
    #[error("validation gate failed: {0}")]
    ValidationGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Exit codes: 0 success, 2 scenario/usage problems, 3 numerical failures,
/// 4 validation-gate failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Range { .. } | Error::MissingSection(_) | Error::Io(_) => 2,
        Error::Domain(_) | Error::Convergence(_) | Error::Quadrature(_) => 3,
        Error::ValidationGate(_) => 4,
    }
}
