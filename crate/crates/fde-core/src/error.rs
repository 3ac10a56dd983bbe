//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by parameter validation, profile construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or numerical parameter violates a hard constraint.
    #[error("invalid parameter: violates {0}")]
    InvalidParams(String),

    /// The local series at the startup radius is not accurate enough.
    #[error("startup radius r0 = {r0:e} too large: series truncation {truncation:e} exceeds tol {tol:e}")]
    StartupRadius { r0: f64, truncation: f64, tol: f64 },

    /// The profile integration broke down.
    #[error("profile integration failed at r = {r:e}: {reason}")]
    Integration { r: f64, reason: String },

    /// A profile invariant was violated at a node.
    #[error("profile invariant '{name}' violated at {coordinate} = {at:e}")]
    Invariant { name: &'static str, coordinate: &'static str, at: f64 },

    /// Evaluation requested outside the computed range.
    #[error("{what} = {value:e} outside evaluable range [{lo:e}, {hi:e}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },

    /// Newton iteration or time stepping gave up.
    #[error("solver failure at t = {t:e}: {reason}")]
    Solver { t: f64, reason: String },

    /// Inputs are structurally inconsistent (grid mismatch, asymmetric grid, ...).
    #[error("incompatible inputs: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
