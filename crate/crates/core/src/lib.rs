//! Regulation-triggered, certainty-equivalence adaptive boundary control for the
//! reaction-diffusion equation `u_t = p u_xx + θ u` on `(0, 1)` with `u(t, 0) = 0`
//! and Dirichlet actuation `u(t, 1) = c U(t)`.
//!
//! The crate is organised around the pieces of the closed loop:
//!
//! * [`plant`]: Crank–Nicolson simulation of the plant, modal traces, and an
//!   exact modal (spectral) oracle used for validation.
//! * [`backstepping`]: Bessel-kernel backstepping design, truncated modal gains
//!   and the decay certificate `(R, ω)` with the mode-count selection rule.
//! * [`reduced`]: reduced-model design by single-input pole placement.
//! * [`identifier`]: windowed least-squares identification of `(θ, c)`.
//! * [`supervisor`]: the event trigger and the adaptive closed loop.
//! * [`passive`]: passive-identifier adaptive baseline.
//! * [`scenario`]: scenario description shared with the command-line harness.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backstepping;
pub mod design;
mod error;
pub mod identifier;
pub mod linalg;
pub mod output;
pub mod passive;
pub mod plant;
pub mod quad;
pub mod reduced;
pub mod scenario;
pub mod supervisor;

pub use design::{DesignBackend, GainSchedule};
pub use error::{Error, Result};
pub use plant::{PlantParams, SolverConfig, SpatialGrid, StateProfile};
