//! Classification of the least-squares minimiser set and estimate updates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{all_normal_equations, known_c_equations, NormalEqs, Window};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentifierConfig {
    /// Modes entering the normal equations.
    pub n_ident: usize,
    /// Zero tolerance for `Q₁` and `Q₃`, relative to the window scale.
    pub eps_q: f64,
    /// Relative singular-value cutoff of the stacked system.
    pub rank_tol: f64,
}

impl Default for IdentifierConfig {
    fn default() -> Self {
        Self { n_ident: 5, eps_q: 1e-10, rank_tol: 1e-8 }
    }
}

impl IdentifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ident == 0 {
            return Err(Error::InvalidParameter("n_ident must be at least 1".into()));
        }
        if !(self.eps_q >= 0.0 && self.eps_q.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps_q must be finite and >= 0, got {}", self.eps_q)));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimates {
    pub theta_hat: f64,
    pub c_hat: f64,
}

/// The set of minimisers of the windowed squared residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    /// Every pair fits: the window carries no information.
    FullPlane,
    /// `θ` is determined, `c` is not.
    ThetaLine { theta: f64 },
    /// Both parameters are determined.
    Singleton { theta: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    FullPlane,
    ThetaLine,
    Singleton,
    Degenerate,
    KnownC,
}

impl SetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetKind::FullPlane => "full_plane",
            SetKind::ThetaLine => "theta_line",
            SetKind::Singleton => "singleton",
            SetKind::Degenerate => "degenerate",
            SetKind::KnownC => "known_c",
        }
    }
}

/// Classifies the minimiser set. `scale` multiplies `cfg.eps_q` in the zero
/// tests for `Q₁` and `Q₃`. A rank-deficient stacked system is reported as
/// [`Error::DegenerateWindow`].
pub fn classify_set(eqs: &NormalEqs, scale: f64, cfg: &IdentifierConfig) -> Result<ParamSet> {
    let tol = cfg.eps_q * scale;
    let qualifying: Vec<_> = eqs.modes.iter().filter(|e| e.q1 > tol).collect();
    let Some(first) = qualifying.first() else {
        return Ok(ParamSet::FullPlane);
    };
    let q3_max = eqs.modes.iter().fold(0.0_f64, |acc, e| acc.max(e.q3));
    if q3_max <= tol {
        return Ok(ParamSet::ThetaLine { theta: first.h1 / first.q1 });
    }
    let modes = &qualifying;
    let k = modes.len();
    let mut a = DMatrix::zeros(2 * k, 2);
    let mut b = DVector::zeros(2 * k);
    for (i, e) in modes.iter().enumerate() {
        a[(2 * i, 0)] = e.q1;
        a[(2 * i, 1)] = e.q2;
        a[(2 * i + 1, 0)] = e.q2;
        a[(2 * i + 1, 1)] = e.q3;
        b[2 * i] = e.h1;
        b[2 * i + 1] = e.h2;
    }
    // column equilibration keeps the rank test independent of the units of c
    let cn: Vec<f64> = (0..2).map(|j| a.column(j).norm()).collect();
    for j in 0..2 {
        let s = cn[j];
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let ratio = smin / smax;
    if !(ratio > cfg.rank_tol) {
        return Err(Error::DegenerateWindow { ratio });
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::Mismatch(e.to_string()))?;
    let (theta, c) = (x[0] / cn[0], x[1] / cn[1]);
    if !(theta.is_finite() && c.is_finite()) || c <= 0.0 {
        return Err(Error::DegenerateWindow { ratio });
    }
    Ok(ParamSet::Singleton { theta, c })
}

/// Applies the update rule: keep whatever the window leaves undetermined.
pub fn update_estimates(prev: Estimates, set: &ParamSet) -> Estimates {
    match *set {
        ParamSet::FullPlane => prev,
        ParamSet::ThetaLine { theta } => Estimates { theta_hat: theta, c_hat: prev.c_hat },
        ParamSet::Singleton { theta, c } => Estimates { theta_hat: theta, c_hat: c },
    }
}

/// Known-`c` update: `θ̂ = Hₘ/Qₘ` at the first mode whose `Q` clears the
/// tolerance, or the previous value when every `Q` vanishes.
pub fn update_theta_known_c(window: &Window, prev_theta: f64, p: f64, c: f64, cfg: &IdentifierConfig) -> f64 {
    let tol = cfg.eps_q * window.scale();
    let n = cfg.n_ident.min(window.trace.n_modes());
    (1..=n)
        .map(|m| known_c_equations(window, m, p, c))
        .find(|(_, q)| *q > tol)
        .map_or(prev_theta, |(h, q)| h / q)
}

/// Outcome of one identification event.
#[derive(Debug, Clone)]
pub struct IdentifierOutcome {
    pub estimates: Estimates,
    pub kind: SetKind,
    pub eqs: NormalEqs,
}

/// Runs the identifier on `window`. With `known_c` set, only `θ̂` is updated
/// and `ĉ` is pinned to the given value.
pub fn identify(window: &Window, prev: Estimates, p: f64, known_c: Option<f64>, cfg: &IdentifierConfig) -> IdentifierOutcome {
    let eqs = all_normal_equations(window, cfg.n_ident, p);
    if let Some(c) = known_c {
        let theta_hat = update_theta_known_c(window, prev.theta_hat, p, c, cfg);
        return IdentifierOutcome { estimates: Estimates { theta_hat, c_hat: c }, kind: SetKind::KnownC, eqs };
    }
    match classify_set(&eqs, window.scale(), cfg) {
        Ok(set) => {
            let kind = match set {
                ParamSet::FullPlane => SetKind::FullPlane,
                ParamSet::ThetaLine { .. } => SetKind::ThetaLine,
                ParamSet::Singleton { .. } => SetKind::Singleton,
            };
            IdentifierOutcome { estimates: update_estimates(prev, &set), kind, eqs }
        }
        Err(e) => {
            log::warn!("identifier fell back to previous estimates: {e}");
            IdentifierOutcome { estimates: prev, kind: SetKind::Degenerate, eqs }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ModeEqs;
    use super::*;

    fn eqs(theta: f64, c: f64, qs: &[(f64, f64, f64)]) -> NormalEqs {
        NormalEqs {
            modes: qs
                .iter()
                .map(|&(q1, q2, q3)| ModeEqs { h1: theta * q1 + c * q2, h2: theta * q2 + c * q3, q1, q2, q3, f2: 0.0 })
                .collect(),
        }
    }

    #[test]
    fn three_cases() {
        let cfg = IdentifierConfig::default();
        let zero = NormalEqs { modes: vec![ModeEqs::default(); 3] };
        assert_eq!(classify_set(&zero, 1.0, &cfg).unwrap(), ParamSet::FullPlane);

        let line = eqs(3.0, 0.0, &[(0.5, 0.0, 0.0), (2.0, 0.0, 0.0)]);
        assert_eq!(classify_set(&line, 1.0, &cfg).unwrap(), ParamSet::ThetaLine { theta: 3.0 });

        let point = eqs(11.0, 1.5, &[(1.0, 0.3, 0.2), (0.4, -0.1, 0.3)]);
        match classify_set(&point, 1.0, &cfg).unwrap() {
            ParamSet::Singleton { theta, c } => {
                assert!((theta - 11.0).abs() < 1e-12 && (c - 1.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collinear_rows_are_degenerate() {
        let cfg = IdentifierConfig::default();
        // j = 2g in every mode
        let e = eqs(1.0, 1.0, &[(1.0, 2.0, 4.0), (0.5, 1.0, 2.0)]);
        assert!(matches!(classify_set(&e, 1.0, &cfg), Err(Error::DegenerateWindow { .. })));
    }

    #[test]
    fn update_rule() {
        let prev = Estimates { theta_hat: 0.1, c_hat: 0.5 };
        assert_eq!(update_estimates(prev, &ParamSet::FullPlane), prev);
        assert_eq!(
            update_estimates(prev, &ParamSet::ThetaLine { theta: 2.0 }),
            Estimates { theta_hat: 2.0, c_hat: 0.5 }
        );
        assert_eq!(
            update_estimates(prev, &ParamSet::Singleton { theta: 2.0, c: 3.0 }),
            Estimates { theta_hat: 2.0, c_hat: 3.0 }
        );
    }
}
