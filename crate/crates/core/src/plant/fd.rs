//! Crank–Nicolson finite differences for `v_t = p v_xx + ρ v + s` with
//! `v(t, 0) = 0` and a Dirichlet value at `x = 1`.

use super::{PlantParams, SolverConfig, SpatialGrid, StateProfile, BLOW_UP_NORM};
use crate::linalg::solve_tridiagonal;
use crate::{Error, Result};

/// Reaction coefficient at the old and new time levels.
#[derive(Debug, Clone, Copy)]
pub struct Reaction {
    pub old: f64,
    pub new: f64,
}

impl Reaction {
    pub fn constant(rho: f64) -> Self {
        Self { old: rho, new: rho }
    }
}

/// A boundary feedback `U = scale · ∫₀¹ k(x) u(x) dx` discretised with the
/// trapezoid rule on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFeedback {
    weights: Vec<f64>,
    scale: f64,
}

impl LinearFeedback {
    pub fn zero(grid: &SpatialGrid) -> Self {
        Self { weights: vec![0.0; grid.n_points()], scale: 0.0 }
    }

    /// `k` sampled on the grid nodes.
    pub fn from_kernel(grid: &SpatialGrid, k: &[f64], scale: f64) -> Self {
        let weights = grid.weights().iter().zip(k).map(|(w, k)| w * k).collect();
        Self { weights, scale }
    }

    /// `k(x) = Σ kₙ √2 sin(nπx)`; `k(1) = 0` is imposed exactly.
    pub fn from_gains(grid: &SpatialGrid, gains: &[f64], scale: f64) -> Self {
        let n = grid.n_points();
        let mut k = grid.sample(|x| {
            gains
                .iter()
                .enumerate()
                .map(|(i, kn)| kn * std::f64::consts::SQRT_2 * ((i + 1) as f64 * std::f64::consts::PI * x).sin())
                .sum()
        });
        k[0] = 0.0;
        k[n - 1] = 0.0;
        Self::from_kernel(grid, &k, scale)
    }

    pub fn input(&self, values: &[f64]) -> f64 {
        self.scale * crate::quad::dot(&self.weights, values)
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.weights.iter().all(|w| *w == 0.0)
    }
}

/// How the boundary value at `x = 1` is set at the new time level.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryUpdate<'a> {
    /// Prescribed value.
    Value(f64),
    /// `v(1) = gain · U` with `U` from the feedback law evaluated implicitly on
    /// the new profile.
    Feedback { law: &'a LinearFeedback, gain: f64 },
}

/// Crank–Nicolson stepper on a fixed grid.
#[derive(Debug, Clone, Copy)]
pub struct CrankNicolson {
    grid: SpatialGrid,
    p: f64,
}

impl CrankNicolson {
    pub fn new(grid: SpatialGrid, p: f64) -> Self {
        Self { grid, p }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Advances nodal values by `dt`. Returns the new nodal values, boundary
    /// nodes included.
    pub fn advance(
        &self,
        old: &[f64],
        reaction: Reaction,
        source: Option<(&[f64], &[f64])>,
        boundary: BoundaryUpdate<'_>,
        dt: f64,
    ) -> Result<Vec<f64>> {
        let n = self.grid.n_points();
        let m = n - 2;
        let dx = self.grid.dx();
        let r = self.p * dt / (dx * dx);
        let half = 0.5 * r;

        let mut rhs = vec![0.0; m];
        for i in 1..=m {
            let mut v = (1.0 - r + 0.5 * dt * reaction.old) * old[i] + half * (old[i - 1] + old[i + 1]);
            if let Some((s_old, s_new)) = source {
                v += 0.5 * dt * (s_old[i] + s_new[i]);
            }
            rhs[i - 1] = v;
        }
        let diag = vec![1.0 + r - 0.5 * dt * reaction.new; m];
        let off = vec![-half; m];

        let mut values = vec![0.0; n];
        match boundary {
            BoundaryUpdate::Value(b) => {
                rhs[m - 1] += half * b;
                let u = solve_tridiagonal(&off, &diag, &off, &rhs);
                values[1..=m].copy_from_slice(&u);
                values[n - 1] = b;
            }
            BoundaryUpdate::Feedback { law, gain } => {
                // b = α Σ_interior w_j u_j with the boundary node's own weight folded in.
                let g = gain * law.scale;
                let denom = 1.0 - g * law.weights[n - 1];
                if denom.abs() < 1e-12 {
                    return Err(Error::SingularFeedback);
                }
                let alpha = g / denom;
                let w = &law.weights[1..=m];
                let y = solve_tridiagonal(&off, &diag, &off, &rhs);
                let mut e = vec![0.0; m];
                e[m - 1] = 1.0;
                let z = solve_tridiagonal(&off, &diag, &off, &e);
                let wy = alpha * crate::quad::dot(w, &y);
                let wz = alpha * crate::quad::dot(w, &z);
                let sm = 1.0 - half * wz;
                if sm.abs() < 1e-14 {
                    return Err(Error::SingularFeedback);
                }
                let coef = half * wy / sm;
                for i in 0..m {
                    values[i + 1] = y[i] + z[i] * coef;
                }
                values[n - 1] = alpha * crate::quad::dot(w, &values[1..=m]);
            }
        }
        Ok(values)
    }

    /// One plant step with the implicit feedback boundary; returns the new
    /// profile and the input `U` at the new time level.
    pub fn step_plant(
        &self,
        state: &StateProfile,
        params: &PlantParams,
        law: &LinearFeedback,
        dt: f64,
    ) -> Result<(StateProfile, f64)> {
        check_finite(state, &self.grid)?;
        let boundary = if law.is_zero() {
            BoundaryUpdate::Value(0.0)
        } else {
            BoundaryUpdate::Feedback { law, gain: params.c }
        };
        let values = self.advance(&state.values, Reaction::constant(params.theta), None, boundary, dt)?;
        let next = StateProfile { t: state.t + dt, values };
        check_finite(&next, &self.grid)?;
        let u = next.boundary() / params.c;
        Ok((next, u))
    }
}

fn check_finite(state: &StateProfile, grid: &SpatialGrid) -> Result<()> {
    let norm = state.norm(grid);
    if !state.is_finite() || !norm.is_finite() || norm > BLOW_UP_NORM {
        return Err(Error::BlowUp { t: state.t, norm });
    }
    Ok(())
}

/// Advances `u[t]` to `u[t + dt]` with the boundary input `U` imposed at the new
/// time level (`u(t+dt, 1) = c U`); the old level uses the boundary value
/// stored in `state`.
pub fn step_fd(
    state: &StateProfile,
    params: &PlantParams,
    boundary_input: f64,
    config: &SolverConfig,
) -> Result<StateProfile> {
    check_finite(state, &config.grid)?;
    let cn = CrankNicolson::new(config.grid, params.p);
    let values = cn.advance(
        &state.values,
        Reaction::constant(params.theta),
        None,
        BoundaryUpdate::Value(params.c * boundary_input),
        config.dt,
    )?;
    let next = StateProfile { t: state.t + config.dt, values };
    check_finite(&next, &config.grid)?;
    Ok(next)
}

/// Closed-loop step with the boundary set by a linear feedback law.
pub fn step_fd_feedback(
    state: &StateProfile,
    params: &PlantParams,
    law: &LinearFeedback,
    config: &SolverConfig,
) -> Result<(StateProfile, f64)> {
    CrankNicolson::new(config.grid, params.p).step_plant(state, params, law, config.dt)
}
