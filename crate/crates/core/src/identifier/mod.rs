//! Windowed least-squares identification of `(θ, c)`.
//!
//! For every mode, `fₙ(t,s) = θ gₙ(t,s) + c jₙ(t,s)` holds along solutions,
//! with
//!
//! * `fₙ = aₙ(t) − aₙ(s) + n²π²p (Fₙ(t) − Fₙ(s))`
//! * `gₙ = Fₙ(t) − Fₙ(s)`
//! * `jₙ = −(−1)ⁿ p n π (V(t) − V(s))`
//!
//! Minimising the squared residual over `[μ, τ]²` gives the normal equations
//! `H₁ = θQ₁ + cQ₂`, `H₂ = θQ₂ + cQ₃` per mode. Each double integral has the
//! form `∫∫ (X(t) − X(s))(Y(t) − Y(s))`, which reduces exactly to
//! `2 (L ∫XY − ∫X ∫Y)` with `L = τ − μ`.

mod classify;

pub use classify::{
    classify_set, identify, update_estimates, update_theta_known_c, Estimates, IdentifierConfig,
    IdentifierOutcome, ParamSet, SetKind,
};

use std::f64::consts::PI;

use crate::plant::{sign_pow, ModalTrace};
use crate::quad::trapezoid_weights;
use crate::{Error, Result};

/// The recorded trace restricted to `[μ, τ]`.
#[derive(Debug, Clone)]
pub struct Window {
    pub mu: f64,
    pub tau: f64,
    pub trace: ModalTrace,
}

impl Window {
    /// Restricts `trace` to the samples in `[mu, tau]`; both ends must be
    /// sample times.
    pub fn from_trace(trace: &ModalTrace, mu: f64, tau: f64) -> Result<Self> {
        if !(tau > mu) {
            return Err(Error::InvalidParameter(format!("window needs tau > mu, got [{mu}, {tau}]")));
        }
        let lo = trace.index_of(mu).ok_or(Error::OutsideWindow { t: mu, mu, tau })?;
        let hi = trace.index_of(tau).ok_or(Error::OutsideWindow { t: tau, mu, tau })?;
        Ok(Self { mu, tau, trace: trace.slice(lo, hi) })
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    /// Largest recorded `‖u‖` on the window.
    pub fn sup_norm(&self) -> f64 {
        self.trace.norms.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Tolerance scale `(τ−μ)² max(1, sup‖u‖⁴)`.
    pub fn scale(&self) -> f64 {
        (self.tau - self.mu).powi(2) * self.sup_norm().powi(4).max(1.0)
    }

    fn interp(&self, y: &[f64], t: f64) -> Result<f64> {
        let times = &self.trace.times;
        let tol = 1e-12 * self.tau.abs().max(1.0);
        if t < self.mu - tol || t > self.tau + tol {
            return Err(Error::OutsideWindow { t, mu: self.mu, tau: self.tau });
        }
        let i = times.partition_point(|s| *s <= t).clamp(1, times.len() - 1);
        let (t0, t1) = (times[i - 1], times[i]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok(y[i - 1] + w * (y[i] - y[i - 1]))
    }
}

fn k2p(n: usize, p: f64) -> f64 {
    (n as f64 * PI).powi(2) * p
}

fn j_coeff(n: usize, p: f64) -> f64 {
    -sign_pow(n) * p * n as f64 * PI
}

/// `(fₙ(t,s), gₙ(t,s), jₙ(t,s))` with linear interpolation between samples.
pub fn fgj_eval(window: &Window, n: usize, t: f64, s: f64, p: f64) -> Result<(f64, f64, f64)> {
    let tr = &window.trace;
    let a = &tr.a[n - 1];
    let f = &tr.f[n - 1];
    let da = window.interp(a, t)? - window.interp(a, s)?;
    let df = window.interp(f, t)? - window.interp(f, s)?;
    let dv = window.interp(&tr.v, t)? - window.interp(&tr.v, s)?;
    Ok((da + k2p(n, p) * df, df, j_coeff(n, p) * dv))
}

/// The five double integrals of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeEqs {
    pub h1: f64,
    pub h2: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// `∫∫ f²`, the scale of the residual.
    pub f2: f64,
}

/// Per-mode normal equations, `modes[n - 1]` for mode `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalEqs {
    pub modes: Vec<ModeEqs>,
}

/// Sample series `X` whose differences give `f`, `g` and `j`.
struct Series {
    f: Vec<f64>,
    g: Vec<f64>,
    j: Vec<f64>,
}

fn series(window: &Window, n: usize, p: f64) -> Series {
    let tr = &window.trace;
    let (k, jc) = (k2p(n, p), j_coeff(n, p));
    Series {
        f: tr.a[n - 1].iter().zip(&tr.f[n - 1]).map(|(a, f)| a + k * f).collect(),
        g: tr.f[n - 1].clone(),
        j: tr.v.iter().map(|v| jc * v).collect(),
    }
}

/// `∫∫ (X(t)−X(s))(Y(t)−Y(s)) ds dt = 2 L ∫ (X − X̄)(Y − Ȳ)`.
struct Moments {
    w: Vec<f64>,
    len: f64,
}

impl Moments {
    fn new(times: &[f64]) -> Self {
        let w = trapezoid_weights(times);
        let len = w.iter().sum();
        Self { w, len }
    }

    fn mean(&self, x: &[f64]) -> f64 {
        crate::quad::dot(&self.w, x) / self.len
    }

    fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let (mx, my) = (self.mean(x), self.mean(y));
        let c: f64 = self.w.iter().zip(x.iter().zip(y)).map(|(w, (x, y))| w * (x - mx) * (y - my)).sum();
        2.0 * self.len * c
    }
}

/// Normal equations of mode `n` by the separable reduction.
pub fn normal_equations(window: &Window, n: usize, p: f64) -> ModeEqs {
    let s = series(window, n, p);
    let m = Moments::new(&window.trace.times);
    ModeEqs {
        h1: m.pair(&s.f, &s.g),
        h2: m.pair(&s.f, &s.j),
        q1: m.pair(&s.g, &s.g),
        q2: m.pair(&s.g, &s.j),
        q3: m.pair(&s.j, &s.j),
        f2: m.pair(&s.f, &s.f),
    }
}

/// Normal equations of mode `n` by the direct double trapezoid sum. Costs
/// `O(K²)` in the number of samples; meant for cross-checking.
pub fn normal_equations_direct(window: &Window, n: usize, p: f64) -> ModeEqs {
    let s = series(window, n, p);
    let w = trapezoid_weights(&window.trace.times);
    let k = w.len();
    let mut e = ModeEqs::default();
    for a in 0..k {
        for b in 0..k {
            let ww = w[a] * w[b];
            let f = s.f[a] - s.f[b];
            let g = s.g[a] - s.g[b];
            let j = s.j[a] - s.j[b];
            e.h1 += ww * f * g;
            e.h2 += ww * f * j;
            e.q1 += ww * g * g;
            e.q2 += ww * g * j;
            e.q3 += ww * j * j;
            e.f2 += ww * f * f;
        }
    }
    e
}

/// Normal equations for modes `1..=n_modes`.
pub fn all_normal_equations(window: &Window, n_modes: usize, p: f64) -> NormalEqs {
    let n = n_modes.min(window.trace.n_modes());
    NormalEqs { modes: (1..=n).map(|m| normal_equations(window, m, p)).collect() }
}

/// Known-`c` quantities `(Hₙ, Qₙ)`: the input term is folded into `fₙ`.
pub fn known_c_equations(window: &Window, n: usize, p: f64, c: f64) -> (f64, f64) {
    let tr = &window.trace;
    let k = k2p(n, p);
    let jc = sign_pow(n) * c * p * n as f64 * PI;
    let f: Vec<f64> = (0..tr.len()).map(|i| tr.a[n - 1][i] + jc * tr.v[i] + k * tr.f[n - 1][i]).collect();
    let m = Moments::new(&tr.times);
    (m.pair(&f, &tr.f[n - 1]), m.pair(&tr.f[n - 1], &tr.f[n - 1]))
}
