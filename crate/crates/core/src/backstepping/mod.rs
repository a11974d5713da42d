//! Backstepping nominal feedback: Bessel kernels, truncated modal gains and the
//! decay certificate `(R, ω)` with the mode-count selection.

pub mod bessel;
mod kernel;

pub use bessel::{bessel_i1, bessel_j1};
pub use kernel::{kernel_k, kernel_l, ktilde, volterra_forward, volterra_inverse, volterra_roundtrip};

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::design::GainSchedule;
use crate::quad::richardson;
use crate::{Error, Result};

/// Panels of the coarse trapezoid rule used for `kₙ` and `∫k̃²`.
pub const GAIN_PANELS: usize = 10_000;

/// Default cap on the mode-count search.
pub const DEFAULT_MODE_CAP: usize = 200;

/// Target-system shift `β`, decay target `σ`, Young weight `B`, margin `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    pub beta: f64,
    pub sigma: f64,
    #[serde(rename = "b")]
    pub young: f64,
    #[serde(rename = "m")]
    pub margin: f64,
    #[serde(default = "default_cap")]
    pub mode_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_MODE_CAP
}

impl Default for DesignParams {
    fn default() -> Self {
        Self { beta: 0.0, sigma: 1.0, young: 0.1, margin: 10.0, mode_cap: DEFAULT_MODE_CAP }
    }
}

impl DesignParams {
    pub fn validate(&self, p: f64) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.young > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be > 0, got {}", self.young)));
        }
        if !(self.margin >= 1.0) {
            return Err(Error::InvalidParameter(format!("M must be >= 1, got {}", self.margin)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {}", self.sigma)));
        }
        let pole = PI * PI + self.beta / p;
        if self.sigma >= pole {
            return Err(Error::SigmaAtPole { sigma: self.sigma, pole });
        }
        Ok(())
    }

    /// `G = √(1 + 1/B)`
    pub fn overshoot_g(&self) -> f64 {
        (1.0 + 1.0 / self.young).sqrt()
    }
}

/// Input-to-state gain `γ` of the target system.
pub fn gamma_coeff(design: &DesignParams, p: f64) -> Result<f64> {
    let mu2 = design.beta / p;
    let pole = PI * PI + mu2;
    if design.sigma >= pole {
        return Err(Error::SigmaAtPole { sigma: design.sigma, pole });
    }
    let pre = (1.0 + design.young).sqrt();
    if mu2 == 0.0 {
        return Ok(pre * PI * PI / (3f64.sqrt() * (PI * PI - design.sigma)));
    }
    let mu = mu2.sqrt();
    let two = 2.0 * mu;
    let sinh_excess = if mu < 1e-3 {
        two.powi(3) / 6.0 + two.powi(5) / 120.0 + two.powi(7) / 5040.0
    } else {
        two.sinh() - two
    };
    Ok(pre * pole * sinh_excess.sqrt() / (2.0 * mu.sqrt() * (pole - design.sigma) * mu.sinh()))
}

/// Samples of `k̃_θ` on a fine uniform grid, with Richardson-extrapolated
/// trapezoid moments.
#[derive(Debug, Clone)]
pub struct KernelQuadrature {
    samples: Vec<f64>,
}

impl KernelQuadrature {
    pub fn new(theta: f64, design: &DesignParams, p: f64) -> Self {
        let panels = 2 * GAIN_PANELS;
        let h = 1.0 / panels as f64;
        let samples = (0..=panels).map(|i| ktilde(theta, i as f64 * h, design, p)).collect();
        Self { samples }
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let panels = self.samples.len() - 1;
        let h = 1.0 / panels as f64;
        let vals: Vec<f64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, k)| k * f(i as f64 * h))
            .collect();
        let fine = h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[panels]));
        let coarse_sum: f64 = vals.iter().step_by(2).sum::<f64>() - 0.5 * (vals[0] + vals[panels]);
        let coarse = 2.0 * h * coarse_sum;
        richardson(coarse, fine)
    }

    /// `∫₀¹ k̃²`
    pub fn energy(&self) -> f64 {
        let panels = self.samples.len() - 1;
        let h = 1.0 / panels as f64;
        let sq: Vec<f64> = self.samples.iter().map(|k| k * k).collect();
        let fine = h * (sq.iter().sum::<f64>() - 0.5 * (sq[0] + sq[panels]));
        let coarse = 2.0 * h * (sq.iter().step_by(2).sum::<f64>() - 0.5 * (sq[0] + sq[panels]));
        richardson(coarse, fine)
    }

    /// `kₙ = ∫₀¹ k̃ φₙ`
    pub fn gain(&self, n: usize) -> f64 {
        if self.samples.iter().all(|k| *k == 0.0) {
            return 0.0;
        }
        let w = n as f64 * PI;
        self.integrate(|x| SQRT_2 * (w * x).sin())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Modal gains `k₁ … k_N` of the boundary kernel.
pub fn modal_gains(theta: f64, n: usize, design: &DesignParams, p: f64) -> Vec<f64> {
    if theta <= 0.0 {
        return vec![0.0; n];
    }
    let q = KernelQuadrature::new(theta, design, p);
    (1..=n).map(|m| q.gain(m)).collect()
}

/// Ingredients of the decay certificate for a given mode count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub gamma: f64,
    pub g: f64,
    /// `1 + (θ+β)/(4p√3)`, upper bound on `L̃_θ`
    pub l_bound: f64,
    /// `1 + ½√((θ+β)/(3p)) I₁(√((θ+β)/p))`, upper bound on `K̃_θ`
    pub k_bound: f64,
    /// `‖k̃_θ − h_θ‖`
    pub residual: f64,
}

impl Certificate {
    /// `γ L̃ ‖k̃ − h‖`; the design is admissible when this is below one.
    pub fn loop_gain(&self) -> f64 {
        self.gamma * self.l_bound * self.residual
    }

    pub fn r(&self) -> f64 {
        self.g * self.l_bound * self.k_bound / (1.0 - self.loop_gain())
    }
}

fn certificate(theta: f64, design: &DesignParams, p: f64, gamma: f64, residual: f64) -> Certificate {
    let lam = (theta + design.beta) / p;
    Certificate {
        gamma,
        g: design.overshoot_g(),
        l_bound: 1.0 + lam / (4.0 * 3f64.sqrt()),
        k_bound: 1.0 + 0.5 * (lam / 3.0).sqrt() * bessel::i1_unchecked(lam.sqrt()),
        residual,
    }
}

/// Smallest mode count `N` with `γ L̃ ‖k̃_θ − h_θ‖ < 1`, the gains, and the
/// certificate `R = G L̃ K̃ / (1 − γ L̃ ‖k̃ − h‖)`, `ω = σp`. For `θ ≤ 0`:
/// `N = 1`, zero gain, `R = 1`, `ω = π²p`.
pub fn select_n_and_r(theta: f64, design: &DesignParams, p: f64) -> Result<GainSchedule> {
    design.validate(p)?;
    if theta <= 0.0 {
        return Ok(GainSchedule { theta_hat: theta, gains: vec![0.0], r: 1.0, omega: PI * PI * p });
    }
    let (gains, cert) = search_modes(theta, design, p)?;
    Ok(GainSchedule { theta_hat: theta, gains, r: cert.r(), omega: design.sigma * p })
}

/// Mode search returning the gains together with the certificate details.
pub fn search_modes(theta: f64, design: &DesignParams, p: f64) -> Result<(Vec<f64>, Certificate)> {
    let gamma = gamma_coeff(design, p)?;
    let q = KernelQuadrature::new(theta, design, p);
    let energy = q.energy();
    let mut gains = Vec::new();
    let mut captured = 0.0;
    for n in 1..=design.mode_cap {
        let k = q.gain(n);
        gains.push(k);
        captured += k * k;
        let cert = certificate(theta, design, p, gamma, (energy - captured).max(0.0).sqrt());
        if cert.loop_gain() < 1.0 {
            return Ok((gains, cert));
        }
    }
    Err(Error::ModeSearchExhausted { theta, cap: design.mode_cap })
}

/// `‖k̃_θ − h_θ‖` for the first `n` modes.
pub fn truncation_residual(theta: f64, n: usize, design: &DesignParams, p: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let q = KernelQuadrature::new(theta, design, p);
    let captured: f64 = (1..=n).map(|m| q.gain(m).powi(2)).sum();
    (q.energy() - captured).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // k₁..k₂₀ for θ = 11, β = 0, p = 1 from 40-digit adaptive quadrature
    pub(crate) const GAINS_11: [f64; 20] = [
        -5.328_521_391_580_824_042_5,
        1.351_172_821_811_282_392_6,
        -0.856_640_918_790_472_907_05,
        0.631_899_856_208_399_664_7,
        -0.501_728_249_343_041_935_66,
        0.416_417_236_243_206_764_3,
        -0.356_063_436_319_213_774_22,
        0.311_066_567_623_393_649_32,
        -0.276_206_712_157_903_613_21,
        0.248_395_380_982_212_739_05,
        -0.225_685_971_620_089_369_3,
        0.206_789_678_456_345_342_65,
        -0.190_818_818_892_035_104_01,
        0.177_141_815_392_133_277_14,
        -0.165_296_928_517_929_235_06,
        0.154_938_698_335_805_894_54,
        -0.145_803_471_523_272_159_86,
        0.137_686_517_193_036_633_85,
        -0.130_426_423_841_321_951_13,
        0.123_894_208_771_762_766_18,
    ];

    #[test]
    fn gains_match_quadrature_oracle() {
        let k = modal_gains(11.0, 20, &DesignParams::default(), 1.0);
        for (n, (a, b)) in k.iter().zip(GAINS_11.iter()).enumerate() {
            assert!((a - b).abs() < 1e-10, "k_{} = {a} vs {b}", n + 1);
        }
        let q = KernelQuadrature::new(11.0, &DesignParams::default(), 1.0);
        assert!((q.energy() - 32.723_117_113_346_561_98).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_theta_has_zero_gains() {
        assert_eq!(modal_gains(-1.0, 4, &DesignParams::default(), 1.0), vec![0.0; 4]);
        assert_eq!(modal_gains(0.0, 2, &DesignParams::default(), 1.0), vec![0.0; 2]);
    }

    #[test]
    fn bessel_inequality() {
        let d = DesignParams::default();
        let q = KernelQuadrature::new(9.0, &d, 1.0);
        let e = q.energy();
        let mut s = 0.0;
        for n in 1..=40 {
            s += q.gain(n).powi(2);
            assert!(s <= e);
        }
    }

    #[test]
    fn gamma_values() {
        let d = DesignParams::default();
        assert!((gamma_coeff(&d, 1.0).unwrap() - 0.673_800_316_417_501_278).abs() < 1e-14);
        let d1 = DesignParams { beta: 1.0, ..d };
        assert!((gamma_coeff(&d1, 1.0).unwrap() - 0.626_820_600_148_087_442).abs() < 1e-13);
        let big = DesignParams { young: 10.0, ..d };
        let small = DesignParams { young: 1.0, ..d };
        assert!(gamma_coeff(&big, 1.0).unwrap() > gamma_coeff(&small, 1.0).unwrap());
        let tiny = DesignParams { beta: 1e-8, ..d };
        assert!((gamma_coeff(&tiny, 1.0).unwrap() - gamma_coeff(&d, 1.0).unwrap()).abs() < 1e-8);
        let pole = DesignParams { sigma: PI * PI, ..d };
        assert!(matches!(gamma_coeff(&pole, 1.0), Err(Error::SigmaAtPole { .. })));
    }

    #[test]
    fn table_rows_from_the_operation() {
        let d = DesignParams::default();
        assert_eq!(select_n_and_r(11.0, &d, 1.0).unwrap().n_modes(), 19);
        assert_eq!(select_n_and_r(0.1, &d, 1.0).unwrap().n_modes(), 1);
        let neg = select_n_and_r(-5.0, &d, 1.0).unwrap();
        assert_eq!((neg.n_modes(), neg.r, neg.omega), (1, 1.0, PI * PI));
        assert_eq!(neg.gains, vec![0.0]);
    }

    #[test]
    fn mode_cap_exhaustion() {
        let d = DesignParams { mode_cap: 5, ..DesignParams::default() };
        assert!(matches!(select_n_and_r(11.0, &d, 1.0), Err(Error::ModeSearchExhausted { .. })));
    }

    #[test]
    fn residual_decreases_with_modes() {
        let d = DesignParams::default();
        let mut prev = f64::INFINITY;
        for n in 1..30 {
            let r = truncation_residual(11.0, n, &d, 1.0);
            assert!(r < prev);
            prev = r;
        }
    }
}
