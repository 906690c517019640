use thiserror::Error;

/// Errors raised across the crate.
///
/// Each variant maps to one CLI exit code through [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Mismatched dimensions, orders or lengths between operands.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A symbol violates one of the standing hypotheses.
    #[error("hypothesis ({hypothesis}) violated: {detail}{}", fmt_direction(.direction))]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
        direction: Option<Vec<f64>>,
    },

    /// An iterative or adaptive procedure did not reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Sampled data cannot resolve the requested transform.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Invalid scenario or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An internal invariant did not hold.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn fmt_direction(d: &Option<Vec<f64>>) -> String {
    match d {
        Some(v) => {
            let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
            format!(" (direction [{}])", parts.join(", "))
        }
        None => String::new(),
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Structural(_) | Error::Domain(_) | Error::Hypothesis { .. } | Error::Config(_) => 2,
            Error::Convergence(_) | Error::Resolution(_) => 3,
            Error::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
