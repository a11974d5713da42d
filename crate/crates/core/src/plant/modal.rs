//! Sine-mode projections and the modal trace recorded along a run.

use super::{SpatialGrid, StateProfile};
use std::f64::consts::PI;

/// Trapezoid approximation of `aₙ = ∫₀¹ sin(nπx) u(x) dx`.
pub fn modal_project(state: &StateProfile, grid: &SpatialGrid, n: usize) -> f64 {
    let m = grid.n_points();
    let dx = grid.dx();
    let k = n as f64 * PI;
    // sin(nπ) = 0 at the right node, u(0) = 0 at the left one
    let mut s = 0.0;
    for i in 1..m - 1 {
        s += (k * grid.x(i)).sin() * state.values[i];
    }
    s * dx
}

/// Precomputed quadrature rows `wᵢ sin(nπxᵢ)` for modes `1..=n_max`.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    rows: Vec<Vec<f64>>,
}

impl ModalBasis {
    pub fn new(grid: &SpatialGrid, n_max: usize) -> Self {
        let w = grid.weights();
        let last = grid.n_points() - 1;
        let rows = (1..=n_max)
            .map(|n| {
                let k = n as f64 * PI;
                (0..grid.n_points())
                    .map(|i| if i == 0 || i == last { 0.0 } else { w[i] * (k * grid.x(i)).sin() })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len()
    }

    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| crate::quad::dot(r, values)).collect()
    }
}

/// Time series of modal coefficients `aₙ(t)`, their running integrals
/// `Fₙ(t) = ∫ aₙ`, the input `U(t)`, its running integral `V(t) = ∫ U`, and
/// `‖u[t]‖`. Running integrals are trapezoid cumulatives of the samples and
/// start at zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModalTrace {
    pub times: Vec<f64>,
    /// `a[n - 1][k] = aₙ(t_k)`
    pub a: Vec<Vec<f64>>,
    /// `f[n - 1][k] = Fₙ(t_k)`
    pub f: Vec<Vec<f64>>,
    pub input: Vec<f64>,
    pub v: Vec<f64>,
    pub norms: Vec<f64>,
}

impl ModalTrace {
    pub fn new(n_modes: usize) -> Self {
        Self {
            a: vec![Vec::new(); n_modes],
            f: vec![Vec::new(); n_modes],
            ..Default::default()
        }
    }

    /// Builds a trace from raw samples; `a[n-1][k]` must have `times.len()` entries.
    pub fn from_samples(times: Vec<f64>, a: Vec<Vec<f64>>, input: Vec<f64>, norms: Vec<f64>) -> Self {
        let f = a.iter().map(|an| crate::quad::cumulative(&times, an)).collect();
        let v = crate::quad::cumulative(&times, &input);
        Self { times, a, f, input, v, norms }
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn push(&mut self, t: f64, a: &[f64], input: f64, norm: f64) {
        let k = self.times.len();
        let h = if k > 0 { t - self.times[k - 1] } else { 0.0 };
        for (n, an) in a.iter().enumerate().take(self.n_modes()) {
            let fv = if k > 0 { self.f[n][k - 1] + 0.5 * h * (self.a[n][k - 1] + an) } else { 0.0 };
            self.a[n].push(*an);
            self.f[n].push(fv);
        }
        let vv = if k > 0 { self.v[k - 1] + 0.5 * h * (self.input[k - 1] + input) } else { 0.0 };
        self.times.push(t);
        self.input.push(input);
        self.v.push(vv);
        self.norms.push(norm);
    }

    pub fn truncate(&mut self, len: usize) {
        self.times.truncate(len);
        for n in 0..self.n_modes() {
            self.a[n].truncate(len);
            self.f[n].truncate(len);
        }
        self.input.truncate(len);
        self.v.truncate(len);
        self.norms.truncate(len);
    }

    /// Index of the sample at time `t` (within a relative tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|s| *s < t - tol);
        (i < self.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    /// Samples `lo..=hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> ModalTrace {
        let r = lo..hi + 1;
        ModalTrace {
            times: self.times[r.clone()].to_vec(),
            a: self.a.iter().map(|x| x[r.clone()].to_vec()).collect(),
            f: self.f.iter().map(|x| x[r.clone()].to_vec()).collect(),
            input: self.input[r.clone()].to_vec(),
            v: self.v[r.clone()].to_vec(),
            norms: self.norms[r].to_vec(),
        }
    }

    /// First `n` modes only.
    pub fn with_modes(&self, n: usize) -> ModalTrace {
        let n = n.min(self.n_modes());
        ModalTrace {
            times: self.times.clone(),
            a: self.a[..n].to_vec(),
            f: self.f[..n].to_vec(),
            input: self.input.clone(),
            v: self.v.clone(),
            norms: self.norms.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn orthonormal_projections() {
        let g = SpatialGrid::new(1001).unwrap();
        let u = StateProfile::from_fn(&g, 0.0, |x| SQRT_2 * (PI * x).sin());
        assert!((modal_project(&u, &g, 1) - 1.0 / SQRT_2).abs() < 1e-12);
        assert!(modal_project(&u, &g, 2).abs() < 1e-14);
        let basis = ModalBasis::new(&g, 3);
        let a = basis.project(&u.values);
        assert!((a[0] - modal_project(&u, &g, 1)).abs() < 1e-15);
    }

    #[test]
    fn polynomial_projection_matches_quadrature_oracle() {
        // ∫₀¹ sin(πx)(x² − x³) dx, extended-precision adaptive quadrature
        let golden = 0.064_503_068_866_398_98;
        let g = SpatialGrid::new(2001).unwrap();
        let u = StateProfile::from_fn(&g, 0.0, |x| x * x - x * x * x);
        let a = modal_project(&u, &g, 1);
        assert!((a - golden).abs() < 1e-7, "{a}");
        let coarse = modal_project(&StateProfile::from_fn(&SpatialGrid::new(1001).unwrap(), 0.0, |x| x * x - x * x * x), &SpatialGrid::new(1001).unwrap(), 1);
        // the integrand's first derivative vanishes at both ends, so the
        // trapezoid error is fourth order here
        let ratio = (coarse - golden).abs() / (a - golden).abs();
        assert!((14.0..18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn trace_cumulatives() {
        let mut tr = ModalTrace::new(2);
        for k in 0..50 {
            let t = k as f64 * 0.01;
            tr.push(t, &[t.sin(), t.cos()], 2.0 * t, 1.0);
        }
        assert_eq!(tr.f[0][0], 0.0);
        assert_eq!(tr.v[0], 0.0);
        assert!((tr.v[49] - 0.49 * 0.49).abs() < 1e-12);
        assert_eq!(tr.index_of(0.2), Some(20));
        assert_eq!(tr.index_of(0.205), None);
        let rebuilt = ModalTrace::from_samples(tr.times.clone(), tr.a.clone(), tr.input.clone(), tr.norms.clone());
        for k in 0..50 {
            assert!((rebuilt.f[1][k] - tr.f[1][k]).abs() < 1e-14);
        }
    }
}
