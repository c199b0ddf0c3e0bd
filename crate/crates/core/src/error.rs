use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} = {value} is outside the allowed range [{min}, {max}]")]
    Range {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Second-order correlations are undefined on the vacuum.
    #[error("g2 is undefined at zero gain (|V|^2 = 0)")]
    ZeroGain,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode {0} carries no photons; normalized correlations are undefined")]
    ZeroPhoton(String),

    #[error("dimension mismatch: expected {expected} modes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation error: norm deficit {deficit:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation { deficit: f64, tolerance: f64 },

    #[error("resource error: {basis} basis states exceed the cap of {cap}")]
    Resource { basis: usize, cap: usize },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("insufficient counts: relative error {relative_error:.3} exceeds cap {cap:.3}")]
    InsufficientCounts { relative_error: f64, cap: f64 },

    #[error("unknown mode {0}")]
    UnknownMode(String),
}
