use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent s = {0} outside the admitted domain s > -1")]
    ExponentDomain(f64),

    #[error("coupling kappa = {0} is not finite")]
    NonFiniteCoupling(f64),

    #[error("no bound ground state: kappa = {kappa} < 0 requires s < 2 (got s = {s})")]
    Unbounded { s: f64, kappa: f64 },

    #[error("moment index k = {0} must be even")]
    OddMoment(usize),

    #[error("orbital index {index} out of range for basis size {d}")]
    OrbitalOutOfRange { index: usize, d: usize },

    #[error("invalid basis setting N = {n}, d = {d}: {reason}")]
    InvalidSetting { n: usize, d: usize, reason: &'static str },

    #[error("configuration space of {size} determinants exceeds the budget of {budget}")]
    BasisTooLarge { size: u128, budget: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("lowest eigenvalues nearly degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("schedule of basis sizes must be non-empty and strictly increasing")]
    BadSchedule,

    #[error("constraint data, line {line}: {reason}")]
    ConstraintFormat { line: usize, reason: String },

    #[error("constraint row {row} violates the Hartree-Fock vertex check (value {value})")]
    HartreeFockViolation { row: usize, value: i64 },

    #[error("no constraint data for setting ({n}, {d})")]
    UnknownSetting { n: usize, d: usize },

    #[error("no available constraint setting fits a state with N = {n}, d = {d}")]
    NoTruncation { n: usize, d: usize },

    #[error("weight {weight:e} outside the constraint setting exceeds tolerance {tol:e}")]
    OutsideWeight { weight: f64, tol: f64 },

    #[error("cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
