//! Reduced-model nominal design: stabilise the first `N` sine modes by
//! single-input pole placement, with `N` chosen so that every neglected mode is
//! open-loop stable.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::design::GainSchedule;
use crate::linalg::{expm, norm2, spectral_abscissa};
use crate::plant::sign_pow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReducedConfig {
    /// Fraction of the spectral abscissa withheld from `ω`.
    pub omega_margin: f64,
    /// Singular-value ratio below which the controllability matrix loses rank.
    pub rank_tol: f64,
    /// Modes kept in the certificate matrix (closed head plus driven tail).
    pub certificate_modes: usize,
}

impl Default for ReducedConfig {
    fn default() -> Self {
        Self { omega_margin: 0.05, rank_tol: 1e-10, certificate_modes: 40 }
    }
}

impl ReducedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.omega_margin) {
            return Err(Error::InvalidParameter("omega_margin must be in [0, 1)".into()));
        }
        if !(self.rank_tol > 0.0) {
            return Err(Error::InvalidParameter("rank_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Diagonal open-loop mode matrix `−pπ² diag(1, …, N²) + θI` and input column
/// `gₙ = −p√2(−1)ⁿ nπ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub eigenvalues: Vec<f64>,
    pub input: Vec<f64>,
}

impl ReducedModel {
    pub fn new(theta: f64, p: f64, n: usize) -> Self {
        let eigenvalues = (1..=n).map(|k| theta - p * (k as f64 * PI).powi(2)).collect();
        let input = (1..=n).map(|k| -p * SQRT_2 * sign_pow(k) * k as f64 * PI).collect();
        Self { eigenvalues, input }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn a_open(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues))
    }

    /// `A + g k`
    pub fn closed(&self, gains: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            (if i == j { self.eigenvalues[i] } else { 0.0 }) + self.input[i] * gains[j]
        })
    }
}

/// Smallest `N ≥ 1` with `p (N+1)² π² > θ`.
pub fn select_n_rm(theta: f64, p: f64) -> usize {
    let mut n = 1;
    while p * ((n + 1) as f64 * PI).powi(2) <= theta {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub controllable: bool,
    pub rank: usize,
    /// `σ_max / σ_min` of the (scaled) controllability matrix.
    pub condition: f64,
}

/// Rank test of `[g, Ag, …, A^{N−1}g]`; `A` is rescaled to unit spectral
/// radius first, which leaves the rank unchanged.
pub fn controllability_check(model: &ReducedModel, rank_tol: f64) -> ControllabilityReport {
    let n = model.n();
    let scale = model.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1e-300);
    let c = DMatrix::from_fn(n, n, |i, j| model.input[i] * (model.eigenvalues[i] / scale).powi(j as i32));
    let sv = c.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let rank = if smax == 0.0 { 0 } else { sv.iter().filter(|s| **s > rank_tol * smax).count() };
    ControllabilityReport { controllable: rank == n, rank, condition: if smin > 0.0 { smax / smin } else { f64::INFINITY } }
}

/// Gains `k` placing the spectrum of `A + g k` at `desired` (real, distinct).
///
/// Matches the characteristic polynomials at the open-loop eigenvalues:
/// `kᵢ = −Πⱼ(λᵢ − dⱼ) / (gᵢ Π_{j≠i}(λᵢ − λⱼ))`.
pub fn pole_place(model: &ReducedModel, desired: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let n = model.n();
    if desired.len() != n {
        return Err(Error::InvalidParameter(format!("need {n} poles, got {}", desired.len())));
    }
    for i in 0..n {
        for j in 0..i {
            if (desired[i] - desired[j]).abs() <= 1e-12 * desired[i].abs().max(1.0) {
                return Err(Error::InvalidParameter("desired poles must be distinct".into()));
            }
        }
    }
    let report = controllability_check(model, rank_tol);
    if !report.controllable {
        return Err(Error::Uncontrollable { rank: report.rank, n });
    }
    if report.condition > 1e14 {
        return Err(Error::IllConditioned { cond: report.condition });
    }
    let lam = &model.eigenvalues;
    Ok((0..n)
        .map(|i| {
            let num: f64 = desired.iter().map(|d| lam[i] - d).product();
            let den: f64 = (0..n).filter(|j| *j != i).map(|j| lam[i] - lam[j]).product();
            -num / (model.input[i] * den)
        })
        .collect())
}

/// Default targets: each mode with `λₙ ≥ 0` moves to `−n²π²p`; stable modes
/// keep their eigenvalue. Colliding targets are pushed further left.
pub fn default_poles(model: &ReducedModel, p: f64) -> Vec<f64> {
    let n = model.n();
    let mut poles: Vec<f64> = (0..n)
        .map(|i| {
            let lam = model.eigenvalues[i];
            if lam >= -1e-9 * p * PI * PI {
                -p * ((i + 1) as f64 * PI).powi(2)
            } else {
                lam
            }
        })
        .collect();
    for i in 0..n {
        while (0..n).any(|j| j != i && (poles[i] - poles[j]).abs() <= 1e-6 * poles[i].abs()) {
            poles[i] *= 1.1;
        }
    }
    poles
}

/// `ω = −(1 − margin) · abscissa(A)` and `R = sup_t ‖e^{At}‖ e^{ωt}` over
/// `t ∈ [0, 20/ω]` (never below 1).
pub fn estimate_decay(a_closed: &DMatrix<f64>, margin: f64) -> Result<(f64, f64)> {
    let abscissa = spectral_abscissa(a_closed);
    if !(abscissa < 0.0) {
        return Err(Error::NotHurwitz { abscissa });
    }
    let omega = -abscissa * (1.0 - margin);
    let t_max = 20.0 / omega;
    let scale = norm2(a_closed).max(omega);
    // log-spaced points resolve the fast transients, uniform ones the tail
    let t_min = 1e-3 / scale;
    let mut times: Vec<f64> = (0..=150)
        .map(|i| t_min * (t_max / t_min).powf(i as f64 / 150.0))
        .collect();
    times.extend((1..=100).map(|i| t_max * i as f64 / 100.0));
    let mut r = 1.0f64;
    for t in times {
        r = r.max(norm2(&expm(a_closed, t)) * (omega * t).exp());
    }
    Ok((r, omega))
}

/// Closed head plus driven, open-loop-stable tail in sine coordinates.
pub fn certificate_matrix(theta: f64, p: f64, gains: &[f64], modes: usize) -> DMatrix<f64> {
    let full = ReducedModel::new(theta, p, modes.max(gains.len()));
    let n = full.n();
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { full.eigenvalues[i] } else { 0.0 };
        let coupling = if j < gains.len() { full.input[i] * gains[j] } else { 0.0 };
        diag + coupling
    })
}

/// Full reduced-model design for `θ̂`.
pub fn reduced_schedule(theta: f64, p: f64, cfg: &ReducedConfig) -> Result<GainSchedule> {
    let n = select_n_rm(theta, p);
    let model = ReducedModel::new(theta, p, n);
    let poles = default_poles(&model, p);
    let gains = pole_place(&model, &poles, cfg.rank_tol)?;
    let m = certificate_matrix(theta, p, &gains, cfg.certificate_modes.max(n + 1));
    let (r, omega) = estimate_decay(&m, cfg.omega_margin)?;
    Ok(GainSchedule { theta_hat: theta, gains, r, omega })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_count_rule() {
        assert_eq!(select_n_rm(11.0, 1.0), 1);
        assert_eq!(select_n_rm(-4.0, 1.0), 1);
        assert_eq!(select_n_rm(0.0, 1.0), 1);
        assert_eq!(select_n_rm(100.0, 1.0), 3);
    }

    #[test]
    fn controllability() {
        for n in 1..=6 {
            assert!(controllability_check(&ReducedModel::new(50.0, 1.0, n), 1e-10).controllable);
        }
        let mut m = ReducedModel::new(50.0, 1.0, 2);
        m.input[1] = 0.0;
        let rep = controllability_check(&m, 1e-10);
        assert!(!rep.controllable);
        assert_eq!(rep.rank, 1);
        assert!(matches!(pole_place(&m, &[-10.0, -45.0], 1e-10), Err(Error::Uncontrollable { .. })));
    }

    #[test]
    fn scalar_placement() {
        let m = ReducedModel::new(11.0, 1.0, 1);
        let k = pole_place(&m, &[-PI * PI], 1e-10).unwrap();
        assert!((k[0] + 11.0 / (SQRT_2 * PI)).abs() < 1e-14);
    }

    #[test]
    fn keeping_open_loop_poles_needs_no_gain() {
        let m = ReducedModel::new(3.0, 1.0, 2);
        let k = pole_place(&m, &m.eigenvalues.clone(), 1e-10).unwrap();
        assert!(k.iter().all(|k| k.abs() < 1e-14));
    }

    #[test]
    fn two_mode_placement_by_eigen_decomposition() {
        let m = ReducedModel::new(50.0, 1.0, 2);
        let k = pole_place(&m, &[-10.0, -45.0], 1e-10).unwrap();
        let mut eig: Vec<f64> = m.closed(&k).complex_eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eig[0] + 45.0).abs() < 1e-8 * 45.0);
        assert!((eig[1] + 10.0).abs() < 1e-8 * 10.0);
    }

    #[test]
    fn repeated_poles_rejected() {
        let m = ReducedModel::new(50.0, 1.0, 2);
        assert!(pole_place(&m, &[-10.0, -10.0], 1e-10).is_err());
    }

    #[test]
    fn decay_of_normal_and_scalar_matrices() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -4.0]));
        let (r, w) = estimate_decay(&d, 0.05).unwrap();
        assert_eq!(r, 1.0);
        assert!((w - 0.95).abs() < 1e-14);
        let s = DMatrix::from_element(1, 1, -3.0);
        assert_eq!(estimate_decay(&s, 0.05).unwrap().0, 1.0);
        let bad = DMatrix::from_element(1, 1, 0.5);
        assert!(matches!(estimate_decay(&bad, 0.05), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn nonnormal_overshoot_matches_dense_sweep() {
        // dense sweep oracle over t ∈ [0, 20/ω]
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 30.0, 0.0, -4.0]);
        let (r, w) = estimate_decay(&a, 0.05).unwrap();
        let mut dense = 1.0f64;
        for i in 0..=20_000 {
            let t = 20.0 / w * i as f64 / 20_000.0;
            dense = dense.max(norm2(&expm(&a, t)) * (w * t).exp());
        }
        assert!(r > 1.0);
        assert!((r - dense).abs() < 1e-2 * dense, "{r} vs {dense}");
    }

    #[test]
    fn schedules_are_hurwitz_on_test_grid() {
        for theta in [-5.0, 0.0, 1.0, PI * PI, 11.0, 50.0, 100.0] {
            let s = reduced_schedule(theta, 1.0, &ReducedConfig::default()).unwrap();
            let model = ReducedModel::new(theta, 1.0, s.n_modes());
            assert!(spectral_abscissa(&model.closed(&s.gains)) < 0.0, "{theta}");
            assert!(s.omega > 0.0 && s.r >= 1.0);
        }
    }
}
