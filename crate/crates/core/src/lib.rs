//! Longitudinal adaptive cruise control laboratory.
//!
//! The crate couples a family of upper controllers (LQR, LQG, phase-plane
//! auto-tuned ALQG, a data-driven Q-function policy, and a receding-horizon
//! baseline) to a lower actuation layer (fuzzy gain-scheduled throttle PID,
//! incremental brake PID, switching logic) and a deterministic fixed-step
//! car-following simulator with scenario scripting, noise injection,
//! metrics, and CSV export.

pub mod actuation;
pub mod alqg;
pub mod config;
pub mod error;
pub mod estimator;
pub mod mpc;
pub mod plant;
pub mod qpolicy;
pub mod riccati;
pub mod simkit;
pub mod supervisor;

pub use error::{Error, Result};

/// Standard gravity, m/s². Input envelopes and dead zones are specified in g.
pub const G_ACCEL: f64 = 9.81;
