//! Recorded run output.

use serde::{Deserialize, Serialize};

use super::EventLog;
use crate::plant::{PlantParams, SpatialGrid, StateProfile};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    /// Record every `stride`-th solver step.
    pub stride: usize,
    /// Keep full profiles alongside the scalar columns.
    pub profiles: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { stride: 10, profiles: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub norm: f64,
    /// Applied input `U(t)`.
    pub input: f64,
    pub theta_hat: f64,
    pub c_hat: f64,
    pub n_modes: usize,
    /// Sine coefficients `a₁..a_{n_max}`.
    pub modes: Vec<f64>,
    pub profile: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm).collect()
    }

    /// Linear interpolation of the recorded norm at time `t`.
    pub fn norm_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        let i = s.partition_point(|x| x.t < t);
        if i == 0 {
            return s.first().filter(|x| (x.t - t).abs() < 1e-12).map(|x| x.norm);
        }
        let b = s.get(i)?;
        let a = &s[i - 1];
        let w = (t - a.t) / (b.t - a.t);
        Some(a.norm + w * (b.norm - a.norm))
    }

    /// Least-squares slope of `−log ‖u‖` over samples in `[t0, t1]`.
    pub fn decay_rate(&self, t0: f64, t1: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.t >= t0 && s.t <= t1 && s.norm > 0.0)
            .map(|s| (s.t, s.norm.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        Some(-sxy / sxx)
    }

    /// First recorded time with `‖u‖ ≤ level`.
    pub fn first_below(&self, level: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.norm <= level).map(|s| s.t)
    }

    /// Peak norm and its time.
    pub fn peak(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0, 0.0), |acc, s| if s.norm > acc.0 { (s.norm, s.t) } else { acc })
    }
}

/// Everything a run produced. A blow-up stops the run early and is reported in
/// `failure` with the partial trajectory and event log kept.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub truth: PlantParams,
    pub grid: SpatialGrid,
    pub trajectory: Trajectory,
    pub events: EventLog,
    pub final_state: StateProfile,
    pub failure: Option<Error>,
}

impl RunOutput {
    pub fn initial_norm(&self) -> f64 {
        self.trajectory.samples.first().map_or(0.0, |s| s.norm)
    }

    pub fn final_theta_hat(&self) -> f64 {
        self.trajectory.samples.last().map_or(f64::NAN, |s| s.theta_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(rate: f64) -> Trajectory {
        Trajectory {
            samples: (0..=100)
                .map(|k| {
                    let t = k as f64 * 0.01;
                    Sample { t, norm: (-rate * t).exp(), input: 0.0, theta_hat: 0.0, c_hat: 1.0, n_modes: 1, modes: Vec::new(), profile: None }
                })
                .collect(),
        }
    }

    #[test]
    fn decay_fit_and_thresholds() {
        let tr = traj(2.0);
        assert!((tr.decay_rate(0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let t = tr.first_below(0.5).unwrap();
        assert!((t - 0.35).abs() < 1e-12);
        assert_eq!(tr.peak(), (1.0, 0.0));
        assert!((tr.norm_at(0.005).unwrap() - 0.5 * (1.0 + (-0.02f64).exp())).abs() < 1e-12);
    }
}
