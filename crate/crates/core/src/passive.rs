//! Adaptive baseline with a passive identifier: an observer PDE driven by the
//! plant state and a gradient update law for `θ̂`.
//!
//! ```text
//! û_t = p û_xx + θ̂ u + γ²‖u‖² (u − û),   û(t,0) = 0,  û(t,1) = U(t)
//! U   = (1/ĉ) ∫ k̃_θ̂(y) u(y) dy
//! θ̂'  = γ ∫ (u − û) u dx
//! ```

use serde::{Deserialize, Serialize};

use crate::backstepping::DesignParams;
use crate::identifier::Estimates;
use crate::plant::{BoundaryUpdate, CrankNicolson, PlantParams, Reaction, SolverConfig, StateProfile};
use crate::supervisor::{full_kernel_feedback, EventLog, OutputOptions, Recorder, RunOutput};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassiveConfig {
    /// Adaptation gain `γ`.
    pub gamma: f64,
}

impl Default for PassiveConfig {
    fn default() -> Self {
        Self { gamma: 100.0 }
    }
}

impl PassiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("passive gain must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassiveState {
    pub u_hat: StateProfile,
    pub theta_hat: f64,
    pub gain_gamma: f64,
}

/// `∫ (u − û) u`.
fn mismatch(u: &StateProfile, u_hat: &StateProfile, solver: &SolverConfig) -> f64 {
    let e: Vec<f64> = u.values.iter().zip(&u_hat.values).map(|(a, b)| a - b).collect();
    solver.grid.inner(&e, &u.values)
}

/// Advances plant, observer and `θ̂` by one step of length `dt`.
///
/// The plant input uses the kernel at the current `θ̂` (zero input for
/// `θ̂ ≤ 0`). The update law is integrated by Heun's rule with a predicted
/// `θ̂` in the observer source at the new level.
pub fn step_passive(
    plant: &StateProfile,
    passive: &PassiveState,
    truth: &PlantParams,
    c_hat: f64,
    design: &DesignParams,
    solver: &SolverConfig,
    dt: f64,
) -> Result<(StateProfile, PassiveState, f64)> {
    if !(passive.gain_gamma > 0.0) {
        return Err(Error::InvalidParameter("passive gain must be > 0".into()));
    }
    let grid = solver.grid;
    let cn = CrankNicolson::new(grid, truth.p);
    let law = full_kernel_feedback(passive.theta_hat, design, truth.p, solver, c_hat);
    let (next, input) = cn.step_plant(plant, truth, &law, dt)?;

    let g = passive.gain_gamma;
    let q_old = g * g * plant.norm(&grid).powi(2);
    let q_new = g * g * next.norm(&grid).powi(2);
    let e_old = mismatch(plant, &passive.u_hat, solver);
    let predicted = passive.theta_hat + dt * g * e_old;
    let s_old: Vec<f64> = plant.values.iter().map(|u| (passive.theta_hat + q_old) * u).collect();
    let s_new: Vec<f64> = next.values.iter().map(|u| (predicted + q_new) * u).collect();
    let values = cn.advance(
        &passive.u_hat.values,
        Reaction { old: -q_old, new: -q_new },
        Some((&s_old, &s_new)),
        BoundaryUpdate::Value(input),
        dt,
    )?;
    let u_hat = StateProfile { t: next.t, values };
    if !u_hat.is_finite() {
        return Err(Error::BlowUp { t: next.t, norm: f64::NAN });
    }
    let e_new = mismatch(&next, &u_hat, solver);
    let theta_hat = passive.theta_hat + 0.5 * dt * g * (e_old + e_new);
    Ok((next, PassiveState { u_hat, theta_hat, gain_gamma: g }, input))
}

/// Runs the passive baseline with `û(0) = u₀` and `θ̂(0) = init.theta_hat`.
/// `init.c_hat` is used as the known input gain.
#[allow(clippy::too_many_arguments)]
pub fn run_passive(
    truth: &PlantParams,
    u0: &StateProfile,
    init: Estimates,
    cfg: &PassiveConfig,
    design: &DesignParams,
    solver: &SolverConfig,
    horizon: f64,
    output: OutputOptions,
) -> Result<RunOutput> {
    truth.validate()?;
    solver.validate()?;
    cfg.validate()?;
    design.validate(truth.p)?;
    crate::supervisor::check_initial_profile(u0, solver)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be > 0, got {horizon}")));
    }
    if !(init.c_hat > 0.0) {
        return Err(Error::InvalidParameter("c_hat must be > 0".into()));
    }
    let grid = solver.grid;
    let mut state = StateProfile { t: 0.0, values: u0.values.clone() };
    let mut passive = PassiveState { u_hat: state.clone(), theta_hat: init.theta_hat, gain_gamma: cfg.gamma };
    let mut rec = Recorder::new(output, solver);
    let est = |theta_hat| Estimates { theta_hat, c_hat: init.c_hat };
    rec.record(0, true, &state, state.norm(&grid), state.boundary() / truth.c, est(passive.theta_hat), 0);

    let (steps, h) = crate::supervisor::snap_steps(horizon, solver.dt);
    let mut failure = None;
    for k in 1..=steps {
        match step_passive(&state, &passive, truth, init.c_hat, design, solver, h) {
            Ok((mut next, mut obs, input)) => {
                next.t = k as f64 * h;
                obs.u_hat.t = next.t;
                state = next;
                passive = obs;
                rec.record(k, k == steps, &state, state.norm(&grid), input, est(passive.theta_hat), 0);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(RunOutput {
        truth: *truth,
        grid,
        trajectory: rec.finish(),
        events: EventLog::default(),
        final_state: state,
        failure,
    })
}

/// Headline figures of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub initial_norm: f64,
    pub peak_norm: f64,
    pub peak_time: f64,
    /// First time `‖u‖ ≤ 0.1 ‖u₀‖`, if reached.
    pub time_to_tenth: Option<f64>,
    /// First time `‖u‖ ≤ 0.01 ‖u₀‖`, if reached.
    pub time_to_hundredth: Option<f64>,
    pub final_norm: f64,
    pub final_theta_hat: f64,
}

impl RunSummary {
    pub fn of(run: &RunOutput) -> Self {
        let tr = &run.trajectory;
        let n0 = run.initial_norm();
        let (peak_norm, peak_time) = tr.peak();
        Self {
            initial_norm: n0,
            peak_norm,
            peak_time,
            time_to_tenth: tr.first_below(0.1 * n0),
            time_to_hundredth: tr.first_below(0.01 * n0),
            final_norm: tr.samples.last().map_or(f64::NAN, |s| s.norm),
            final_theta_hat: run.final_theta_hat(),
        }
    }
}

/// Side-by-side summary of two runs from the same plant and initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub a: RunSummary,
    pub b: RunSummary,
}

impl ComparisonReport {
    /// `b − a` for peak norm, final norm and final `θ̂`.
    pub fn deltas(&self) -> [(&'static str, f64); 3] {
        [
            ("peak_norm", self.b.peak_norm - self.a.peak_norm),
            ("final_norm", self.b.final_norm - self.a.final_norm),
            ("final_theta_hat", self.b.final_theta_hat - self.a.final_theta_hat),
        ]
    }
}

/// Compares two runs; they must share the plant and the initial norm.
pub fn compare_runs(a: &RunOutput, b: &RunOutput) -> Result<ComparisonReport> {
    if a.truth != b.truth {
        return Err(Error::Mismatch(format!("plants differ: {:?} vs {:?}", a.truth, b.truth)));
    }
    let (na, nb) = (a.initial_norm(), b.initial_norm());
    if (na - nb).abs() > 1e-9 * na.max(nb).max(1.0) {
        return Err(Error::Mismatch(format!("initial norms differ: {na} vs {nb}")));
    }
    Ok(ComparisonReport { a: RunSummary::of(a), b: RunSummary::of(b) })
}
