//! Singular self-similar solutions of the radial fast diffusion equation
//! `u_t = ((n-1)/m) Δu^m`, `0 < m < (n-2)/n`.
//!
//! * [`params`]: parameter regime and derived constants
//! * [`profile`]: profile ODE integration, far-field trace and the constant `K`
//! * [`asymptotics`]: higher-order blow-up expansions and their residuals
//! * [`evolution`]: implicit annulus solvers in physical and rescaled form
//! * [`measures`]: weighted L¹ norms, contraction and convergence reports

pub mod asymptotics;
pub mod error;
pub mod evolution;
pub mod interp;
pub mod measures;
pub mod ode;
pub mod params;
pub mod profile;

pub use error::{Error, Result};
pub use params::{derive_constants, DerivedConstants, ModelParams};
pub use profile::{Profile, ProfileRequest};
