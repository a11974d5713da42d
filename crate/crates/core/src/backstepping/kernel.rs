//! Closed-form backstepping kernels and their Volterra transforms.

use super::bessel::ratio;
use super::DesignParams;
use crate::plant::{SpatialGrid, StateProfile};

/// `K_θ(z, s) = −λ s I₁(√(λ(z²−s²)))/√(λ(z²−s²))` with `λ = (θ+β)/p`, for
/// `0 ≤ s ≤ z ≤ 1`. Negative `λ` continues analytically to the `J₁` form.
pub fn kernel_k(theta: f64, design: &DesignParams, p: f64, z: f64, s: f64) -> f64 {
    let lam = (theta + design.beta) / p;
    -lam * s * ratio(lam * (z * z - s * s))
}

/// `L_θ(z, s)`: as [`kernel_k`] with `J₁` in place of `I₁`.
pub fn kernel_l(theta: f64, design: &DesignParams, p: f64, z: f64, s: f64) -> f64 {
    let lam = (theta + design.beta) / p;
    -lam * s * ratio(-lam * (z * z - s * s))
}

/// Boundary gain kernel `k̃_θ(x) = K_θ(1, x)` for `θ > 0`, zero otherwise.
pub fn ktilde(theta: f64, x: f64, design: &DesignParams, p: f64) -> f64 {
    if theta <= 0.0 {
        0.0
    } else {
        kernel_k(theta, design, p, 1.0, x)
    }
}

fn volterra(grid: &SpatialGrid, f: &[f64], kernel: impl Fn(f64, f64) -> f64, sign: f64) -> Vec<f64> {
    let n = grid.n_points();
    let h = grid.dx();
    let x = grid.nodes();
    let mut out = f.to_vec();
    for i in 1..n {
        let mut acc = 0.5 * (kernel(x[i], x[0]) * f[0] + kernel(x[i], x[i]) * f[i]);
        for j in 1..i {
            acc += kernel(x[i], x[j]) * f[j];
        }
        out[i] += sign * h * acc;
    }
    out
}

/// `v(z) = u(z) − ∫₀^z K_θ(z, s) u(s) ds`.
pub fn volterra_forward(grid: &SpatialGrid, u: &[f64], theta: f64, design: &DesignParams, p: f64) -> Vec<f64> {
    volterra(grid, u, |z, s| kernel_k(theta, design, p, z, s), -1.0)
}

/// `u(z) = v(z) + ∫₀^z L_θ(z, s) v(s) ds`.
pub fn volterra_inverse(grid: &SpatialGrid, v: &[f64], theta: f64, design: &DesignParams, p: f64) -> Vec<f64> {
    volterra(grid, v, |z, s| kernel_l(theta, design, p, z, s), 1.0)
}

/// L² distance between `u` and `inverse(forward(u))`.
pub fn volterra_roundtrip(profile: &StateProfile, grid: &SpatialGrid, theta: f64, design: &DesignParams, p: f64) -> f64 {
    let v = volterra_forward(grid, &profile.values, theta, design, p);
    let back = volterra_inverse(grid, &v, theta, design, p);
    let diff: Vec<f64> = back.iter().zip(&profile.values).map(|(a, b)| a - b).collect();
    grid.norm(&diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn d0() -> DesignParams {
        DesignParams::default()
    }

    #[test]
    fn diagonal_value() {
        assert!((kernel_k(11.0, &d0(), 1.0, 0.5, 0.5) + 2.75).abs() < 1e-15);
        assert!((kernel_l(11.0, &d0(), 1.0, 0.5, 0.5) + 2.75).abs() < 1e-15);
    }

    #[test]
    fn zero_prefactor() {
        let d = DesignParams { beta: 2.0, ..d0() };
        for (z, s) in [(1.0, 0.3), (0.5, 0.1), (0.7, 0.7)] {
            assert_eq!(kernel_k(-2.0, &d, 1.0, z, s), 0.0);
            assert_eq!(kernel_l(-2.0, &d, 1.0, z, s), 0.0);
        }
    }

    #[test]
    fn golden_kernel_values() {
        // 40-digit evaluation of the Bessel closed forms
        assert!((kernel_k(11.0, &d0(), 1.0, 1.0, 0.5) + 6.746_871_332_674_040_589).abs() < 1e-12);
        assert!((kernel_l(11.0, &d0(), 1.0, 1.0, 0.5) + 0.737_510_288_374_595_336_2).abs() < 1e-12);
    }

    #[test]
    fn ktilde_conventions() {
        assert_eq!(ktilde(-3.0, 0.4, &d0(), 1.0), 0.0);
        assert_eq!(ktilde(11.0, 0.0, &d0(), 1.0), 0.0);
        assert_eq!(ktilde(11.0, 0.5, &d0(), 1.0), kernel_k(11.0, &d0(), 1.0, 1.0, 0.5));
    }

    #[test]
    fn kernels_agree_to_first_order() {
        for eps in [1e-2, 1e-3, 1e-4] {
            let k = kernel_k(eps, &d0(), 1.0, 0.9, 0.3);
            let l = kernel_l(eps, &d0(), 1.0, 0.9, 0.3);
            // difference is O(eps²)
            assert!((k - l).abs() < eps * eps, "{eps}");
            assert!((k + eps * 0.3 / 2.0).abs() < eps * eps);
        }
    }

    #[test]
    fn volterra_identity_and_zero() {
        let g = SpatialGrid::new(201).unwrap();
        let u = StateProfile::from_fn(&g, 0.0, |x| SQRT_2 * (PI * x).sin());
        assert_eq!(volterra_roundtrip(&u, &g, 0.0, &d0(), 1.0), 0.0);
        let z = StateProfile::zeros(&g, 0.0);
        assert_eq!(volterra_roundtrip(&z, &g, 11.0, &d0(), 1.0), 0.0);
    }

    #[test]
    fn volterra_roundtrip_second_order() {
        let errs: Vec<f64> = [501, 1001]
            .iter()
            .map(|&n| {
                let g = SpatialGrid::new(n).unwrap();
                let u = StateProfile::from_fn(&g, 0.0, |x| SQRT_2 * (PI * x).sin());
                volterra_roundtrip(&u, &g, 11.0, &d0(), 1.0)
            })
            .collect();
        assert!(errs[1] < 1e-3);
        let ratio = errs[0] / errs[1];
        assert!((3.5..4.5).contains(&ratio), "{errs:?}");
    }
}
