use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The truncated basis is too small for the requested accuracy.
    #[error("truncation tail {tail:.3e} exceeds tolerance {tol:.3e}; use a cutoff of at least {suggested}")]
    Truncation { tail: f64, tol: f64, suggested: usize },

    #[error("moment integration became unstable at t = {time:.6e} ({reason})")]
    Unstable { time: f64, reason: String },

    #[error("pump amplitude is singular: external linewidth and detuning are both zero")]
    SingularDrive,

    #[error("invalid experiment config: {}", .keys.join(", "))]
    Schema { keys: Vec<String> },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
