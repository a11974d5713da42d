//! Bessel functions of order one for the backstepping kernels.

use crate::{Error, Result};

/// Largest argument accepted by the checked evaluators.
pub const MAX_ARG: f64 = 50.0;

/// Above this argument `J₁` switches from the power series (which loses
/// digits to cancellation) to Miller's backward recurrence.
const J1_SERIES_LIMIT: f64 = 8.0;

/// `Σ_m (±1)^m (x/2)^{2m+1} / (m! (m+1)!)`, summed until the increment drops
/// below `1e-16` of the partial sum.
fn series(x: f64, alternating: bool) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    for m in 1..500 {
        term *= q / (m as f64 * (m + 1) as f64);
        if alternating {
            term = -term;
        }
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    sum
}

/// Modified Bessel function `I₁(x)` for any `x ≥ 0` (no range check).
pub(crate) fn i1_unchecked(x: f64) -> f64 {
    series(x, false)
}

/// Bessel function `J₁(x)` for any `x ≥ 0` (no range check).
pub(crate) fn j1_unchecked(x: f64) -> f64 {
    if x <= J1_SERIES_LIMIT {
        series(x, true)
    } else {
        j1_miller(x)
    }
}

/// Backward recurrence `J_{k−1} = (2k/x) J_k − J_{k+1}` normalised with
/// `J₀ + 2 Σ J_{2k} = 1`.
fn j1_miller(x: f64) -> f64 {
    let start = 2 * ((x + 20.0 + (40.0 * x).sqrt()) as usize / 2 + 1);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        let idx = k - 1;
        if idx == 1 {
            j1 = cur;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { cur } else { 2.0 * cur };
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    j1 / norm
}

fn check(x: f64) -> Result<()> {
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::OutOfRange { x, max: MAX_ARG });
    }
    Ok(())
}

/// `I₁(x)` for `0 ≤ x ≤ 50`.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(i1_unchecked(x))
}

/// `J₁(x)` for `0 ≤ x ≤ 50`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(j1_unchecked(x))
}

/// `I₁(y)/y` for `q = y² ≥ 0` and `J₁(y)/y` for `q = −y² < 0`.
pub(crate) fn ratio(q: f64) -> f64 {
    if q >= 0.0 {
        let y = q.sqrt();
        if y < 1e-4 {
            0.5 + q / 16.0 + q * q / 384.0
        } else {
            i1_unchecked(y) / y
        }
    } else {
        let y = (-q).sqrt();
        if y < 1e-4 {
            0.5 + q / 16.0 + q * q / 384.0
        } else {
            j1_unchecked(y) / y
        }
    }
}
