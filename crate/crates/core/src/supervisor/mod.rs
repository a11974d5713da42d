//! The closed loop: certainty-equivalence control between events, the
//! regulation-based event trigger, window anchoring and estimate updates.

mod run;
mod trajectory;

pub use run::{full_kernel_feedback, nominal_feedback, run_adaptive, run_nominal, AdaptiveSetup, NominalLaw};
pub(crate) use run::{check_initial_profile, snap_steps, Recorder};
pub use trajectory::{OutputOptions, RunOutput, Sample, Trajectory};

use serde::{Deserialize, Serialize};

use crate::identifier::{Estimates, ModeEqs, SetKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriggerConfig {
    /// Upper bound on the time between events.
    #[serde(rename = "T")]
    pub dwell: f64,
    /// Overshoot slack in the norm trigger.
    pub a: f64,
    /// Number of dwell periods the identification window may reach back.
    pub n_tilde: usize,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        Self { dwell: 0.05, a: 1.0, n_tilde: 1 }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dwell > 0.0 && self.dwell.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be > 0, got {}", self.dwell)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be > 0, got {}", self.a)));
        }
        if self.n_tilde < 1 {
            return Err(Error::InvalidParameter("n_tilde must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerReason {
    Start,
    Timer,
    NormCrossing,
}

impl TriggerReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TriggerReason::Start => "start",
            TriggerReason::Timer => "timer",
            TriggerReason::NormCrossing => "norm_crossing",
        }
    }
}

/// One event with the identifier diagnostics that produced the new estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub index: usize,
    pub tau: f64,
    pub mu: f64,
    pub norm: f64,
    pub before: Estimates,
    pub after: Estimates,
    /// `None` for the initial event.
    pub kind: Option<SetKind>,
    pub reason: TriggerReason,
    /// Active schedule after the event.
    pub n_modes: usize,
    pub r: f64,
    pub omega: f64,
    pub eqs: Vec<ModeEqs>,
    /// Set when the redesign failed and the previous schedule was kept.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<EventRecord>,
}

impl EventLog {
    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.tau).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Window anchor for the update at `τ_{i+1}`: the earliest `τ_j`, `j ≤ i`, no
/// older than `τ_{i+1} − ÑT`. `event_times` must hold `τ_0..=τ_{i+1}`.
pub fn mu_lookup(event_times: &[f64], i: usize, config: &TriggerConfig) -> f64 {
    let next = event_times[i + 1];
    let lo = next - config.n_tilde as f64 * config.dwell;
    let tol = 1e-9 * next.abs().max(1.0);
    event_times[..=i].iter().copied().find(|t| *t >= lo - tol).unwrap_or(event_times[i])
}

/// Norm trigger: fires once `‖u‖` reaches `R(1+a)` times its value at the last
/// event. A zero state at the last event never fires; the timer takes over.
pub fn check_trigger(norm_now: f64, norm_at_event: f64, r: f64, a: f64) -> bool {
    norm_at_event > 0.0 && norm_now >= r * (1.0 + a) * norm_at_event
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_examples() {
        let ev = [0.0, 0.05, 0.10];
        let one = TriggerConfig { dwell: 0.05, a: 1.0, n_tilde: 1 };
        let two = TriggerConfig { n_tilde: 2, ..one };
        assert_eq!(mu_lookup(&ev, 0, &one), 0.0);
        assert_eq!(mu_lookup(&ev, 1, &one), 0.05);
        assert_eq!(mu_lookup(&ev, 1, &two), 0.0);
    }

    #[test]
    fn trigger_threshold() {
        assert!(!check_trigger(3.9, 1.0, 2.0, 1.0));
        assert!(check_trigger(4.0, 1.0, 2.0, 1.0));
        assert!(!check_trigger(1e9, 0.0, 2.0, 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(TriggerConfig::default().validate().is_ok());
        assert!(TriggerConfig { dwell: 0.0, ..Default::default() }.validate().is_err());
        assert!(TriggerConfig { a: 0.0, ..Default::default() }.validate().is_err());
        assert!(TriggerConfig { n_tilde: 0, ..Default::default() }.validate().is_err());
    }
}
