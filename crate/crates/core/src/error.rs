use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("singular point in {op}: x = 0 is excluded")]
    SingularPoint { op: &'static str },

    #[error("regime condition violated: (x-y)^2 = {lhs:.6e} < {rhs:.6e}")]
    Regime { lhs: f64, rhs: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in {op} at {location}")]
    NonFinite { op: &'static str, location: String },

    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain {
        op,
        msg: msg.into(),
    }
}

pub(crate) fn ensure(cond: bool, op: &'static str, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(domain(op, msg()))
    }
}
