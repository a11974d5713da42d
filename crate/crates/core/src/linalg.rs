//! Small dense and banded linear-algebra helpers.

use nalgebra::DMatrix;

/// Solves a tridiagonal system with sub-diagonal `lower`, diagonal `diag`,
/// super-diagonal `upper` (Thomas algorithm). `lower[0]` and
/// `upper[n - 1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Largest real part over the spectrum of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Induced 2-norm (largest singular value).
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    a.singular_values().max()
}

/// Matrix exponential `exp(a t)`.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    (a * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_solve() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.2 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * i as f64).collect();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i > 0 {
                m[(i, i - 1)] = lower[i];
            }
            if i + 1 < n {
                m[(i, i + 1)] = upper[i];
            }
        }
        let y = m.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -4.0]));
        let e = expm(&a, 0.5);
        assert!((e[(0, 0)] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(spectral_abscissa(&a), -1.0);
    }
}
