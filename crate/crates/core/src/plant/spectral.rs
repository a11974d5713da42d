//! Exact modal solution of the closed loop under a finite modal feedback, and
//! related constructive identities used as numerical oracles.
//!
//! With `U = (√2/ĉ) Σ_{m≤N} k_m a_m`, the sine coefficients obey
//! `ȧₙ = (θ − n²π²p) aₙ − (−1)ⁿ p n π c U`. Modes `1..=N` form a closed
//! system; modes above `N` are driven by it and never feed back, so each tail
//! mode is a Duhamel convolution of the head solution.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::{PI, SQRT_2};

use super::{sign_pow, ModalTrace, PlantParams, SpatialGrid, StateProfile};
use crate::linalg::expm;
use crate::{Error, Result};

/// A plant in closed loop with `U = (√2/ĉ) Σ kₙ aₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLoop {
    pub params: PlantParams,
    pub gains: Vec<f64>,
    pub c_hat: f64,
}

impl OracleLoop {
    pub fn new(params: PlantParams, gains: Vec<f64>, c_hat: f64) -> Self {
        Self { params, gains, c_hat }
    }

    /// Row `r` with `U = r · (a₁ … a_N)`.
    pub fn input_row(&self) -> Vec<f64> {
        self.gains.iter().map(|k| SQRT_2 * k / self.c_hat).collect()
    }

    pub fn input(&self, a: &[f64]) -> f64 {
        self.input_row().iter().zip(a).map(|(r, a)| r * a).sum()
    }

    fn head_matrix(&self) -> DMatrix<f64> {
        let n = self.gains.len();
        let r = self.input_row();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { self.params.modal_rate(i + 1) } else { 0.0 };
            diag + self.params.modal_input(i + 1) * r[j]
        })
    }
}

/// The `n_max × n_max` modal matrix of the truncated closed loop.
pub fn closed_loop_matrix(lp: &OracleLoop, n_max: usize) -> Result<DMatrix<f64>> {
    let n = lp.gains.len();
    if n > n_max {
        return Err(Error::TooManyModes { requested: n, available: n_max });
    }
    let r = lp.input_row();
    Ok(DMatrix::from_fn(n_max, n_max, |i, j| {
        let diag = if i == j { lp.params.modal_rate(i + 1) } else { 0.0 };
        let coupling = if j < n { lp.params.modal_input(i + 1) * r[j] } else { 0.0 };
        diag + coupling
    }))
}

/// Modal coefficients `aₙ(t)`, `n = 1..=a0.len()`, from `aₙ(0) = a0[n-1]`.
pub fn spectral_oracle(lp: &OracleLoop, a0: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = lp.gains.len();
    let n_max = a0.len();
    if n > n_max {
        return Err(Error::TooManyModes { requested: n, available: n_max });
    }
    if t == 0.0 {
        return Ok(a0.to_vec());
    }
    let head = lp.head_matrix();
    let xi = DVector::from_column_slice(&a0[..n]);
    let head_t = expm(&head, t) * &xi;

    let r = lp.input_row();
    let mut out = head_t.as_slice().to_vec();
    for m in n + 1..=n_max {
        let lam = lp.params.modal_rate(m);
        let b = lp.params.modal_input(m);
        // exp([[A, 0], [b rᵀ, λ]] t): bottom-left block is the Duhamel kernel
        let aug = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            if i < n && j < n {
                head[(i, j)]
            } else if i == n && j < n {
                b * r[j]
            } else if i == n && j == n {
                lam
            } else {
                0.0
            }
        });
        let e = expm(&aug, t);
        let forced: f64 = (0..n).map(|j| e[(n, j)] * xi[j]).sum();
        out.push(forced + e[(n, n)] * a0[m - 1]);
    }
    Ok(out)
}

/// Bound on the homogeneous part of the neglected modes above `n_max`:
/// `energy · exp((θ − (n_max+1)²π²p) t)`.
pub fn tail_bound(params: &PlantParams, energy: f64, n_max: usize, t: f64) -> f64 {
    energy * (params.modal_rate(n_max + 1) * t).exp()
}

/// Samples the exact closed loop at `t_k = k h`, `k = 0..=steps`, and records
/// a [`ModalTrace`] with trapezoid running integrals. Norms use Parseval over
/// the tracked modes.
pub fn oracle_trace(lp: &OracleLoop, a0: &[f64], h: f64, steps: usize) -> Result<ModalTrace> {
    let n_max = a0.len();
    // one-step transition matrix, column by column
    let mut phi = DMatrix::zeros(n_max, n_max);
    for j in 0..n_max {
        let mut e = vec![0.0; n_max];
        e[j] = 1.0;
        let col = spectral_oracle(lp, &e, h)?;
        for i in 0..n_max {
            phi[(i, j)] = col[i];
        }
    }
    let mut a = DVector::from_column_slice(a0);
    let mut tr = ModalTrace::new(n_max);
    for k in 0..=steps {
        if k > 0 {
            a = &phi * &a;
        }
        let s = a.as_slice();
        let norm = (2.0 * s.iter().map(|x| x * x).sum::<f64>()).sqrt();
        tr.push(k as f64 * h, s, lp.input(s), norm);
    }
    Ok(tr)
}

/// `|Σ_{n≤n_terms} Lₙ φₙ(x)/(n²π²) − (x − x³)/6|` with `Lₙ = −(−1)ⁿ√2/(nπ)`
/// and `φₙ = √2 sin(nπx)`.
pub fn series_identity_residual(x: f64, n_terms: usize) -> f64 {
    let mut s = 0.0;
    for n in 1..=n_terms {
        let k = n as f64 * PI;
        let l = -sign_pow(n) * SQRT_2 / k;
        s += l * SQRT_2 * (k * x).sin() / (k * k);
    }
    (s - (x - x * x * x) / 6.0).abs()
}

/// L² distance between `u` and the inverse Fredholm transform of the forward
/// transform `w = u − (x + γk) ∫ k u`, inverted by
/// `u = w + β (x + γk) ∫ k w` with `β = 1/(1 − ∫ s k(s) ds − γ‖k‖²)`.
pub fn fredholm_roundtrip(profile: &StateProfile, grid: &SpatialGrid, k: &[f64], gamma: f64) -> Result<f64> {
    let x = grid.nodes();
    let psi: Vec<f64> = x.iter().zip(k).map(|(x, k)| x + gamma * k).collect();
    let denom = 1.0 - grid.inner(&x, k) - gamma * grid.inner(k, k);
    if denom.abs() < 1e-10 {
        return Err(Error::DegenerateTransform { denominator: denom });
    }
    let beta = 1.0 / denom;
    let ku = grid.inner(k, &profile.values);
    let w: Vec<f64> = profile.values.iter().zip(&psi).map(|(u, s)| u - s * ku).collect();
    let kw = grid.inner(k, &w);
    let back: Vec<f64> = w.iter().zip(&psi).map(|(w, s)| w + beta * s * kw).collect();
    let diff: Vec<f64> = back.iter().zip(&profile.values).map(|(a, b)| a - b).collect();
    Ok(grid.norm(&diff))
}
