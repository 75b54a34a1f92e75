//! Error type shared by all laboratory operations.
//!
//! The variants mirror how callers are expected to react: `Domain`/`Range`
//! mean the request itself is outside an operation's mathematical domain,
//! `Input` means malformed data (non-finite numbers, unsorted tables,
//! inconsistent lengths), `Precondition` lists the named hypotheses of a
//! lemma-style check that failed, and `Budget` signals that an exact
//! computation would exceed its enumeration budget.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Request exceeds the representable range of the object (e.g. volume
    /// beyond a space's capacity or a radius past the model horizon).
    #[error("range error: {0}")]
    Range(String),

    /// Malformed input data: non-finite values, unsorted grids, mismatched
    /// lengths, disconnected graphs, and similar structural defects.
    #[error("input error: {0}")]
    Input(String),

    /// One or more named preconditions of a certified check failed.
    #[error("precondition failed: {}", .0.join("; "))]
    Precondition(Vec<String>),

    /// Exact enumeration or iteration budget exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A profile vanishes at an interior point, so no space can be
    /// synthesised from it.
    #[error("singular profile: {0}")]
    SingularProfile(String),

    /// The small-volume ratio f(t)/t^{1-1/n} does not stabilise, so the
    /// cone-angle data needed by the synthesis ODE is missing.
    #[error("asymptote error: {0}")]
    Asymptote(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

/// Validate that every entry of `xs` is finite; `what` names the field in the
/// error message.
pub fn ensure_finite(xs: &[f64], what: &str) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::input(format!("{what}[{i}] is not finite ({x})")));
        }
    }
    Ok(())
}
