//! Closed-loop drivers.

use serde::{Deserialize, Serialize};

use super::{check_trigger, mu_lookup, EventLog, EventRecord, OutputOptions, RunOutput, Sample, Trajectory, TriggerConfig, TriggerReason};
use crate::backstepping::{self, ktilde, DesignParams};
use crate::design::{DesignBackend, GainSchedule};
use crate::identifier::{identify, Estimates, IdentifierConfig, ModeEqs, SetKind, Window};
use crate::plant::{CrankNicolson, LinearFeedback, ModalBasis, ModalTrace, PlantParams, SolverConfig, StateProfile};
use crate::{Error, Result};

/// Settings of the regulation-triggered adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdaptiveSetup {
    pub trigger: TriggerConfig,
    pub design: DesignBackend,
    pub identifier: IdentifierConfig,
    /// Pin `ĉ` to its initial value and identify `θ` only.
    pub known_c: bool,
    pub output: OutputOptions,
}

/// Fixed feedback for runs with known parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NominalLaw {
    OpenLoop,
    /// Modal gains of the design backend; `n_modes` overrides the selected
    /// mode count (backstepping only).
    Truncated { n_modes: Option<usize> },
    /// `U = (1/c) ∫ k̃_θ(y) u(y) dy` with the full backstepping kernel.
    FullKernel,
}

pub(crate) struct Recorder {
    opts: OutputOptions,
    basis: ModalBasis,
    samples: Vec<Sample>,
}

impl Recorder {
    pub(crate) fn new(opts: OutputOptions, solver: &SolverConfig) -> Self {
        Self { opts, basis: ModalBasis::new(&solver.grid, solver.n_max), samples: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn record(&mut self, step: usize, force: bool, state: &StateProfile, norm: f64, input: f64, est: Estimates, n_modes: usize) {
        if !(force || step.is_multiple_of(self.opts.stride.max(1))) {
            return;
        }
        if self.samples.last().is_some_and(|s| s.t == state.t) {
            return;
        }
        self.samples.push(Sample {
            t: state.t,
            norm,
            input,
            theta_hat: est.theta_hat,
            c_hat: est.c_hat,
            n_modes,
            modes: self.basis.project(&state.values),
            profile: self.opts.profiles.then(|| state.values.clone()),
        });
    }

    pub(crate) fn finish(self) -> Trajectory {
        Trajectory { samples: self.samples }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be > 0, got {horizon}")));
    }
    Ok(())
}

pub(crate) fn check_initial_profile(u0: &StateProfile, solver: &SolverConfig) -> Result<()> {
    if u0.values.len() != solver.grid.n_points() {
        return Err(Error::Mismatch(format!(
            "initial profile has {} nodes, grid has {}",
            u0.values.len(),
            solver.grid.n_points()
        )));
    }
    Ok(())
}

/// Step count and uniform step that land exactly on `remaining`.
pub(crate) fn snap_steps(remaining: f64, dt: f64) -> (usize, f64) {
    let n = (remaining / dt - 1e-9).ceil().max(1.0) as usize;
    (n, remaining / n as f64)
}

/// Runs the regulation-triggered adaptive loop from `u0` over `[0, horizon]`.
///
/// Between events the input is the nominal feedback for the frozen estimates.
/// Events fire on the dwell timer or when `‖u‖` reaches `R(1+a)` times its
/// value at the last event; the crossing is located by linear interpolation
/// between solver steps.
pub fn run_adaptive(
    truth: &PlantParams,
    u0: &StateProfile,
    init: Estimates,
    setup: &AdaptiveSetup,
    solver: &SolverConfig,
    horizon: f64,
) -> Result<RunOutput> {
    truth.validate()?;
    solver.validate()?;
    setup.trigger.validate()?;
    setup.identifier.validate()?;
    setup.design.validate(truth.p)?;
    check_horizon(horizon)?;
    check_initial_profile(u0, solver)?;
    if !(init.c_hat > 0.0 && init.c_hat.is_finite() && init.theta_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("initial estimates must be finite with c_hat > 0, got {init:?}")));
    }

    let grid = solver.grid;
    let cn = CrankNicolson::new(grid, truth.p);
    let basis = ModalBasis::new(&grid, setup.identifier.n_ident);
    let known_c = setup.known_c.then_some(init.c_hat);
    let trig = setup.trigger;
    let tol = 1e-12 * horizon.max(1.0);

    let mut est = init;
    let mut schedule = setup.design.schedule(est.theta_hat, truth.p)?;
    let mut law = schedule.feedback(&grid, est.c_hat);

    let mut state = StateProfile { t: 0.0, values: u0.values.clone() };
    let mut input = state.boundary() / truth.c;
    let mut norm = state.norm(&grid);
    let mut trace = ModalTrace::new(basis.n_max());
    trace.push(0.0, &basis.project(&state.values), input, norm);

    let mut log = EventLog::default();
    log.events.push(event(0, 0.0, 0.0, norm, (est, est), None, TriggerReason::Start, &schedule, Vec::new(), None));
    let mut event_times = vec![0.0];
    let mut tau = 0.0;
    let mut norm_event = norm;

    let mut rec = Recorder::new(setup.output, solver);
    let mut step = 0;
    rec.record(step, true, &state, norm, input, est, schedule.n_modes());
    let mut failure = None;

    while state.t < horizon - tol {
        let deadline = tau + trig.dwell;
        let target = deadline.min(horizon);
        let (n, h) = snap_steps(target - state.t, solver.dt);
        let (mut next, mut u_next) = match cn.step_plant(&state, truth, &law, h) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        if n == 1 {
            next.t = target;
        }
        let mut n_next = next.norm(&grid);
        step += 1;

        let reason = if check_trigger(n_next, norm_event, schedule.r, trig.a) {
            let thr = schedule.r * (1.0 + trig.a) * norm_event;
            let s = ((thr - norm) / (n_next - norm)).clamp(0.0, 1.0);
            let t_star = state.t + s * (next.t - state.t);
            next = state.lerp(&next, t_star);
            u_next = input + s * (u_next - input);
            n_next = next.norm(&grid);
            Some(TriggerReason::NormCrossing)
        } else if (next.t - deadline).abs() <= tol {
            Some(TriggerReason::Timer)
        } else {
            None
        };

        trace.push(next.t, &basis.project(&next.values), u_next, n_next);
        state = next;
        input = u_next;
        norm = n_next;

        if let Some(reason) = reason {
            let i = log.len() - 1;
            event_times.push(state.t);
            let mu = mu_lookup(&event_times, i, &trig);
            let window = match Window::from_trace(&trace, mu, state.t) {
                Ok(w) => w,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            };
            let out = identify(&window, est, truth.p, known_c, &setup.identifier);
            let before = est;
            est = out.estimates;
            let mut note = None;
            if est.theta_hat != schedule.theta_hat {
                match setup.design.schedule(est.theta_hat, truth.p) {
                    Ok(s) => schedule = s,
                    Err(e) => {
                        log::warn!("redesign at t = {} failed: {e}", state.t);
                        note = Some(format!("redesign failed ({e}); previous schedule kept"));
                    }
                }
            }
            law = schedule.feedback(&grid, est.c_hat);
            tau = state.t;
            norm_event = norm;
            log.events.push(event(i + 1, tau, mu, norm, (before, est), Some(out.kind), reason, &schedule, out.eqs.modes, note));
        }
        let last = state.t >= horizon - tol;
        rec.record(step, last || reason.is_some(), &state, norm, input, est, schedule.n_modes());
    }

    Ok(RunOutput { truth: *truth, grid, trajectory: rec.finish(), events: log, final_state: state, failure })
}

#[allow(clippy::too_many_arguments)]
fn event(
    index: usize,
    tau: f64,
    mu: f64,
    norm: f64,
    (before, after): (Estimates, Estimates),
    kind: Option<SetKind>,
    reason: TriggerReason,
    schedule: &GainSchedule,
    eqs: Vec<ModeEqs>,
    note: Option<String>,
) -> EventRecord {
    EventRecord {
        index,
        tau,
        mu,
        norm,
        before,
        after,
        kind,
        reason,
        n_modes: schedule.n_modes(),
        r: schedule.r,
        omega: schedule.omega,
        eqs,
        note,
    }
}

/// Grid feedback for a known-parameter run and the number of modes it uses
/// (zero for the full kernel and the open loop).
pub fn nominal_feedback(
    truth: &PlantParams,
    design: &DesignBackend,
    law: NominalLaw,
    solver: &SolverConfig,
) -> Result<(LinearFeedback, usize)> {
    let grid = solver.grid;
    match law {
        NominalLaw::OpenLoop => Ok((LinearFeedback::zero(&grid), 0)),
        NominalLaw::Truncated { n_modes: None } => {
            let s = design.schedule(truth.theta, truth.p)?;
            Ok((s.feedback(&grid, truth.c), s.n_modes()))
        }
        NominalLaw::Truncated { n_modes: Some(n) } => match design {
            DesignBackend::Backstepping(d) => {
                if n == 0 {
                    return Err(Error::InvalidParameter("mode override must be >= 1".into()));
                }
                let gains = backstepping::modal_gains(truth.theta, n, d, truth.p);
                Ok((LinearFeedback::from_gains(&grid, &gains, 1.0 / truth.c), n))
            }
            DesignBackend::ReducedModel(_) => {
                Err(Error::InvalidParameter("mode override applies to the backstepping backend only".into()))
            }
        },
        NominalLaw::FullKernel => {
            let d = match design {
                DesignBackend::Backstepping(d) => *d,
                DesignBackend::ReducedModel(_) => DesignParams::default(),
            };
            Ok((full_kernel_feedback(truth.theta, &d, truth.p, solver, truth.c), 0))
        }
    }
}

/// `U = (1/ĉ) ∫ k̃_θ̂(y) u(y) dy` on the grid; zero for `θ̂ ≤ 0`.
pub fn full_kernel_feedback(theta: f64, d: &DesignParams, p: f64, solver: &SolverConfig, c_hat: f64) -> LinearFeedback {
    let grid = solver.grid;
    if theta <= 0.0 {
        return LinearFeedback::zero(&grid);
    }
    let k = grid.sample(|x| ktilde(theta, x, d, p));
    LinearFeedback::from_kernel(&grid, &k, 1.0 / c_hat)
}

/// Closed loop with known `(θ, c)` and a fixed nominal feedback.
pub fn run_nominal(
    truth: &PlantParams,
    u0: &StateProfile,
    design: &DesignBackend,
    law: NominalLaw,
    solver: &SolverConfig,
    horizon: f64,
    output: OutputOptions,
) -> Result<RunOutput> {
    truth.validate()?;
    solver.validate()?;
    design.validate(truth.p)?;
    check_horizon(horizon)?;
    check_initial_profile(u0, solver)?;

    let grid = solver.grid;
    let cn = CrankNicolson::new(grid, truth.p);
    let (feedback, n_modes) = nominal_feedback(truth, design, law, solver)?;
    let est = Estimates { theta_hat: truth.theta, c_hat: truth.c };

    let mut state = StateProfile { t: 0.0, values: u0.values.clone() };
    let mut rec = Recorder::new(output, solver);
    rec.record(0, true, &state, state.norm(&grid), state.boundary() / truth.c, est, n_modes);

    let (steps, h) = snap_steps(horizon, solver.dt);
    let mut failure = None;
    for k in 1..=steps {
        let input = match cn.step_plant(&state, truth, &feedback, h) {
            Ok((next, u)) => {
                state = next;
                state.t = k as f64 * h;
                u
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        rec.record(k, k == steps, &state, state.norm(&grid), input, est, n_modes);
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
