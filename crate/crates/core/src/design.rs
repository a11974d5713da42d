//! Nominal-feedback schedules and the selectable design backends.

use serde::{Deserialize, Serialize};

use crate::backstepping::{self, DesignParams};
use crate::plant::{LinearFeedback, SpatialGrid};
use crate::reduced::{self, ReducedConfig};
use crate::Result;

/// A designed nominal feedback `U = (1/ĉ) ∫ Σ kₙ φₙ(x) u(x) dx` for the design
/// value `θ̂`, with the decay certificate `‖u[t]‖ ≤ R e^{−ωt} ‖u₀‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSchedule {
    pub theta_hat: f64,
    pub gains: Vec<f64>,
    pub r: f64,
    pub omega: f64,
}

impl GainSchedule {
    pub fn n_modes(&self) -> usize {
        self.gains.len()
    }

    /// Grid discretisation of the feedback with `1/ĉ` folded in.
    pub fn feedback(&self, grid: &SpatialGrid, c_hat: f64) -> LinearFeedback {
        LinearFeedback::from_gains(grid, &self.gains, 1.0 / c_hat)
    }

    /// `U` from sine coefficients `aₙ = ∫ sin(nπx) u`.
    pub fn input_from_modes(&self, a: &[f64], c_hat: f64) -> f64 {
        std::f64::consts::SQRT_2 * self.gains.iter().zip(a).map(|(k, a)| k * a).sum::<f64>() / c_hat
    }
}

/// Which nominal design maps `θ̂` to a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum DesignBackend {
    Backstepping(DesignParams),
    ReducedModel(ReducedConfig),
}

impl Default for DesignBackend {
    fn default() -> Self {
        DesignBackend::Backstepping(DesignParams::default())
    }
}

impl DesignBackend {
    pub fn schedule(&self, theta: f64, p: f64) -> Result<GainSchedule> {
        match self {
            DesignBackend::Backstepping(d) => backstepping::select_n_and_r(theta, d, p),
            DesignBackend::ReducedModel(cfg) => reduced::reduced_schedule(theta, p, cfg),
        }
    }

    pub fn validate(&self, p: f64) -> Result<()> {
        match self {
            DesignBackend::Backstepping(d) => d.validate(p),
            DesignBackend::ReducedModel(cfg) => cfg.validate(),
        }
    }
}
