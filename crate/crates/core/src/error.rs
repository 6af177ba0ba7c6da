use thiserror::Error;

/// Errors raised by the models, solvers, simulator and ingestion code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("price {price} outside model bounds [{lo}, {hi}]")]
    OutOfRange { price: f64, lo: f64, hi: f64 },

    #[error("conditional mean undefined at p = {0}: F(p) = 0")]
    UndefinedConditional(f64),

    #[error("bid {0} is never admitted: F(p) = 0")]
    NeverEnters(f64),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoRoot {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("recovery time infeasible: t_r = {t_r} must be below t_k / (2 (1 - F)) = {limit}")]
    InfeasibleRecovery { t_r: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("no data: {0}")]
    EmptyData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
