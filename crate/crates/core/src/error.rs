use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation overflow: amplitude at grade {grade} cannot be raised within nmax = {nmax}")]
    TruncationOverflow { grade: u32, nmax: u32 },

    #[error("point is too close to the origin of C^2 (|z| = {norm:e})")]
    NearOrigin { norm: f64 },

    #[error("chart pole: the chart-defining component vanishes")]
    ChartPole,

    #[error("zero section: fiber coordinate is zero")]
    ZeroSection,

    #[error("state is not supported on the single grade {grade}")]
    MixedGrade { grade: u32 },

    #[error("state is identically zero")]
    ZeroState,

    #[error("no convergence after {iters} iterations")]
    NoConvergence { iters: usize },

    #[error("out of range: {0}")]
    Range(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
