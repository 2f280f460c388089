use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mode numbers must be non-negative, got {0}")]
    NegativeMode(i64),

    #[error("mode number {0} exceeds the supported range (2^20)")]
    ModeTooLarge(i64),

    #[error("frequency components must be strictly positive")]
    NonPositiveFrequency,

    #[error("nonlinearity power must satisfy p >= 2, got {0}")]
    InvalidPower(u32),

    #[error("initial data has a nonzero entry at {0:?}, outside the strictly positive modes")]
    SupportViolation(Vec<i64>),

    #[error("space-time entry at n={n:?}, j={j:?} violates the band n <= j <= n^2")]
    BandViolation { n: Vec<i64>, j: Vec<i64> },

    #[error("zero-mode solution is singular at t = {t_blowup}; requested t = {t}")]
    Singularity { t: f64, t_blowup: f64 },

    #[error("division by an interval containing zero")]
    IntervalDivisionByZero,

    #[error("interval endpoints became non-finite during {0}; enclosure lost")]
    Overflow(&'static str),

    #[error("integration state became non-finite at t = {last_finite_t}")]
    Divergence { last_finite_t: f64 },

    #[error("degenerate regression window: need n_min < n_max with at least two shells")]
    DegenerateRegression,

    #[error("row sum S_{n} is zero or non-finite; cannot take logarithm")]
    EmptyRowSum { n: u64 },

    #[error("fractional power {num}/{den} is not exactly representable for this scalar")]
    FractionalPower { num: i64, den: i64 },

    #[error("time grid needs at least {need} points, got {got}")]
    GridTooSmall { need: usize, got: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
