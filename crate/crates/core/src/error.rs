use thiserror::Error;

use crate::lattice::Chain;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{chain} is not topological: |mu| = {mu} must be below 2t = {two_t}")]
    NotTopological { chain: Chain, mu: f64, two_t: f64 },

    #[error(
        "{chain}: zero-mode doublet (|E| = {splitting:e}) is not separated from the bulk \
         (|E| = {bulk:e}) by a factor of 100"
    )]
    ZeroModesNotIsolated { chain: Chain, splitting: f64, bulk: f64 },

    #[error("defect site is coupled to the chains (entry {row},{col} = {value:e})")]
    DefectCoupled { row: usize, col: usize, value: f64 },

    #[error("mode has weight {weight:e} on the defect site")]
    ModeOnDefect { weight: f64 },

    #[error("time {time} lies outside the envelope window [0, {duration}]")]
    TimeOutOfRange { time: f64, duration: f64 },

    #[error("pulse-area calibration did not converge (target {target}, last scale {scale})")]
    CalibrationFailed { target: f64, scale: f64 },

    #[error("norm drift {drift:e} exceeds tolerance {tolerance:e} at t = {time}")]
    NormDrift { drift: f64, tolerance: f64, time: f64 },

    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },

    #[error("leakage {leakage:e} out of the computational subspace exceeds {threshold:e}")]
    Leakage { leakage: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
