//! Plant simulation: the reaction-diffusion equation with boundary actuation.

mod fd;
mod modal;
mod spectral;

pub use fd::{step_fd, step_fd_feedback, BoundaryUpdate, CrankNicolson, LinearFeedback, Reaction};
pub use modal::{modal_project, ModalBasis, ModalTrace};
pub use spectral::{
    closed_loop_matrix, fredholm_roundtrip, oracle_trace, series_identity_residual,
    spectral_oracle, tail_bound, OracleLoop,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Blow-up threshold on `‖u[t]‖`.
pub const BLOW_UP_NORM: f64 = 1e12;

/// True plant constants: diffusion `p`, reaction `θ`, high-frequency gain `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams {
    pub p: f64,
    pub theta: f64,
    pub c: f64,
}

impl PlantParams {
    pub fn new(p: f64, theta: f64, c: f64) -> Result<Self> {
        let params = Self { p, theta, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be > 0, got {}", self.p)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be > 0, got {}", self.c)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        Ok(())
    }

    /// Open-loop modal eigenvalue `θ − n²π²p`.
    pub fn modal_rate(&self, n: usize) -> f64 {
        let k = n as f64 * std::f64::consts::PI;
        self.theta - k * k * self.p
    }

    /// Input coefficient of mode `n` in the modal ODE: `−(−1)ⁿ p n π c`.
    pub fn modal_input(&self, n: usize) -> f64 {
        -sign_pow(n) * self.p * n as f64 * std::f64::consts::PI * self.c
    }
}

/// `(−1)ⁿ`
pub(crate) fn sign_pow(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Uniform grid on `[0, 1]` including both boundary nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            1.0
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        crate::quad::uniform_weights(self.n_points, self.dx())
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n_points).map(|i| f(self.x(i))).collect()
    }

    /// Trapezoid `∫₀¹ f g dx` for nodal samples.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let n = self.n_points;
        let mut s = 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]);
        for i in 1..n - 1 {
            s += f[i] * g[i];
        }
        s * self.dx()
    }

    /// Trapezoid L² norm.
    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }
}

/// Profile `u[t]` sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateProfile {
    pub t: f64,
    pub values: Vec<f64>,
}

impl StateProfile {
    /// Samples `f` on the grid; the left boundary node is pinned to zero.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &SpatialGrid, t: f64, f: F) -> Self {
        let mut values = grid.sample(f);
        values[0] = 0.0;
        Self { t, values }
    }

    pub fn zeros(grid: &SpatialGrid, t: f64) -> Self {
        Self { t, values: vec![0.0; grid.n_points()] }
    }

    pub fn boundary(&self) -> f64 {
        *self.values.last().expect("profile is never empty")
    }

    pub fn norm(&self, grid: &SpatialGrid) -> f64 {
        grid.norm(&self.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Linear interpolation in time between `self` and `other`.
    pub fn lerp(&self, other: &StateProfile, t: f64) -> StateProfile {
        let w = if other.t == self.t { 1.0 } else { (t - self.t) / (other.t - self.t) };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + w * (b - a))
            .collect();
        StateProfile { t, values }
    }
}

/// Time-stepping and trace-recording settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    /// Modes recorded in trajectory output.
    pub n_max: usize,
    #[serde(rename = "n_points", with = "grid_points")]
    pub grid: SpatialGrid,
}

mod grid_points {
    use super::SpatialGrid;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &SpatialGrid, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(g.n_points as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SpatialGrid, D::Error> {
        Ok(SpatialGrid { n_points: usize::deserialize(d)? })
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 1e-4, n_max: 40, grid: SpatialGrid { n_points: 100 } }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, n_max: usize, n_points: usize) -> Result<Self> {
        let cfg = Self { dt, n_max, grid: SpatialGrid::new(n_points)? };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        SpatialGrid::new(self.grid.n_points)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_nonpositive() {
        assert!(PlantParams::new(0.0, 1.0, 1.0).is_err());
        assert!(PlantParams::new(1.0, 1.0, -1.0).is_err());
        assert!(PlantParams::new(1.0, -100.0, 1.0).is_ok());
    }

    #[test]
    fn grid_covers_unit_interval() {
        let g = SpatialGrid::new(100).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[99], 1.0);
        assert!((g.dx() - 1.0 / 99.0).abs() < 1e-16);
        assert!(SpatialGrid::new(2).is_err());
    }

    #[test]
    fn norm_of_sine() {
        let g = SpatialGrid::new(2001).unwrap();
        let u = StateProfile::from_fn(&g, 0.0, |x| 2f64.sqrt() * (std::f64::consts::PI * x).sin());
        assert!((u.norm(&g) - 1.0).abs() < 1e-8);
    }
}
