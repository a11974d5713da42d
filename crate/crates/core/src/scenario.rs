//! Scenario description shared by the command-line harness and the tests.

use std::f64::consts::{PI, SQRT_2};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::backstepping::DesignParams;
use crate::design::DesignBackend;
use crate::identifier::{Estimates, IdentifierConfig};
use crate::passive::{run_passive, PassiveConfig};
use crate::plant::{PlantParams, SolverConfig, SpatialGrid, StateProfile};
use crate::supervisor::{run_adaptive, run_nominal, AdaptiveSetup, NominalLaw, OutputOptions, RunOutput, TriggerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    OpenLoop,
    NominalFullKernel,
    NominalTruncated,
    AdaptiveRegulation,
    AdaptiveRegulationKnownC,
    AdaptivePassive,
}

impl RunMode {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, RunMode::AdaptiveRegulation | RunMode::AdaptiveRegulationKnownC)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedProfile {
    /// `√2 sin(πx) + x² − x³`
    SineCubic,
    /// `√2 sin(πx)`
    Sine1,
    Zero,
    /// `x² − x³`
    Poly,
}

impl NamedProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NamedProfile::SineCubic => SQRT_2 * (PI * x).sin() + x * x - x * x * x,
            NamedProfile::Sine1 => SQRT_2 * (PI * x).sin(),
            NamedProfile::Zero => 0.0,
            NamedProfile::Poly => x * x - x * x * x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Named { name: NamedProfile },
    /// Two columns `x,u` (header optional), linearly interpolated onto the grid.
    Csv { path: PathBuf },
    /// `u = Σ cₙ √2 sin(nπx)`.
    Modes { coefficients: Vec<f64> },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Named { name: NamedProfile::SineCubic }
    }
}

impl InitialCondition {
    /// Samples the profile on `grid` with `u(0) = 0` pinned.
    pub fn build(&self, grid: &SpatialGrid) -> Result<StateProfile> {
        match self {
            InitialCondition::Named { name } => Ok(StateProfile::from_fn(grid, 0.0, |x| name.eval(x))),
            InitialCondition::Modes { coefficients } => Ok(StateProfile::from_fn(grid, 0.0, |x| {
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * SQRT_2 * ((i + 1) as f64 * PI * x).sin())
                    .sum()
            })),
            InitialCondition::Csv { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
                let pts = parse_profile_csv(&text)?;
                Ok(StateProfile::from_fn(grid, 0.0, |x| interpolate(&pts, x)))
            }
        }
    }
}

/// Parses `x,u` rows; a non-numeric first line is taken as a header.
pub fn parse_profile_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (cols.len() == 2).then(|| (cols[0].parse::<f64>(), cols[1].parse::<f64>()));
        match parsed {
            Some((Ok(x), Ok(u))) => pts.push((x, u)),
            _ if i == 0 && pts.is_empty() => continue,
            _ => return Err(Error::InvalidParameter(format!("bad profile row {}: {line:?}", i + 1))),
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("profile needs at least two rows".into()));
    }
    if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) || pts[0].0 > 0.0 || pts[pts.len() - 1].0 < 1.0 {
        return Err(Error::InvalidParameter("profile x must increase and cover [0, 1]".into()));
    }
    Ok(pts)
}

fn interpolate(pts: &[(f64, f64)], x: f64) -> f64 {
    let i = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
    let ((x0, y0), (x1, y1)) = (pts[i - 1], pts[i]);
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// A complete run description. The defaults encode the known-`c` headline
/// experiment: `θ = 11`, `p = c = 1`, `T = 0.05`, `a = 1`, `Ñ = 1`,
/// `θ̂₀ = 0.1` and `u₀ = √2 sin(πx) + x² − x³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub mode: RunMode,
    pub horizon: f64,
    /// Mode-count override for `nominal_truncated`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal_modes: Option<usize>,
    pub plant: PlantParams,
    pub initial: InitialCondition,
    pub estimates: Estimates,
    pub trigger: TriggerConfig,
    pub design: DesignBackend,
    pub solver: SolverConfig,
    pub identifier: IdentifierConfig,
    pub passive: PassiveConfig,
    pub output: OutputOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mode: RunMode::AdaptiveRegulationKnownC,
            horizon: 3.0,
            nominal_modes: None,
            plant: PlantParams { p: 1.0, theta: 11.0, c: 1.0 },
            initial: InitialCondition::default(),
            estimates: Estimates { theta_hat: 0.1, c_hat: 1.0 },
            trigger: TriggerConfig::default(),
            design: DesignBackend::default(),
            solver: SolverConfig::default(),
            identifier: IdentifierConfig::default(),
            passive: PassiveConfig::default(),
            output: OutputOptions::default(),
        }
    }
}

impl Scenario {
    /// The passive-identifier comparison run: `γ = 100`, same plant and `u₀`,
    /// with a horizon long enough for its much slower decay.
    pub fn passive_baseline() -> Self {
        Self { mode: RunMode::AdaptivePassive, horizon: 30.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be > 0, got {}", self.horizon)));
        }
        self.plant.validate()?;
        self.solver.validate()?;
        self.trigger.validate()?;
        self.identifier.validate()?;
        self.passive.validate()?;
        self.design.validate(self.plant.p)?;
        if !(self.estimates.c_hat > 0.0 && self.estimates.c_hat.is_finite() && self.estimates.theta_hat.is_finite()) {
            return Err(Error::InvalidParameter("estimates must be finite with c_hat > 0".into()));
        }
        if self.output.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if self.nominal_modes == Some(0) {
            return Err(Error::InvalidParameter("nominal_modes must be >= 1".into()));
        }
        if let InitialCondition::Csv { path } = &self.initial {
            if path.as_os_str().is_empty() {
                return Err(Error::InvalidParameter("initial csv path is empty".into()));
            }
        }
        Ok(())
    }

    fn backstepping_params(&self) -> DesignParams {
        match self.design {
            DesignBackend::Backstepping(d) => d,
            DesignBackend::ReducedModel(_) => DesignParams::default(),
        }
    }

    /// Validates and runs the scenario.
    pub fn run(&self) -> Result<RunOutput> {
        self.validate()?;
        let u0 = self.initial.build(&self.solver.grid)?;
        let nominal = |law| run_nominal(&self.plant, &u0, &self.design, law, &self.solver, self.horizon, self.output);
        match self.mode {
            RunMode::OpenLoop => nominal(NominalLaw::OpenLoop),
            RunMode::NominalFullKernel => nominal(NominalLaw::FullKernel),
            RunMode::NominalTruncated => nominal(NominalLaw::Truncated { n_modes: self.nominal_modes }),
            RunMode::AdaptiveRegulation | RunMode::AdaptiveRegulationKnownC => {
                let setup = AdaptiveSetup {
                    trigger: self.trigger,
                    design: self.design,
                    identifier: self.identifier,
                    known_c: self.mode == RunMode::AdaptiveRegulationKnownC,
                    output: self.output,
                };
                run_adaptive(&self.plant, &u0, self.estimates, &setup, &self.solver, self.horizon)
            }
            RunMode::AdaptivePassive => run_passive(
                &self.plant,
                &u0,
                self.estimates,
                &self.passive,
                &self.backstepping_params(),
                &self.solver,
                self.horizon,
                self.output,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_profiles() {
        let g = SpatialGrid::new(11).unwrap();
        let u = InitialCondition::default().build(&g).unwrap();
        assert_eq!(u.values[0], 0.0);
        assert!(u.boundary().abs() < 1e-15);
        assert!((u.values[5] - (SQRT_2 + 0.125)).abs() < 1e-15);
        let z = InitialCondition::Named { name: NamedProfile::Zero }.build(&g).unwrap();
        assert!(z.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn modal_profile() {
        let g = SpatialGrid::new(101).unwrap();
        let u = InitialCondition::Modes { coefficients: vec![0.0, 1.0] }.build(&g).unwrap();
        assert!((u.values[25] - SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn csv_profile_parsing() {
        let pts = parse_profile_csv("x,u\n0,0\n0.5,1\n1,0\n").unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(interpolate(&pts, 0.25), 0.5);
        assert!(parse_profile_csv("0,0\n0.5,1\n").is_err());
        assert!(parse_profile_csv("0,0\nfoo,1\n1,0").is_err());
    }

    #[test]
    fn default_validates() {
        assert!(Scenario::default().validate().is_ok());
        assert!(Scenario::passive_baseline().validate().is_ok());
        let bad = Scenario { horizon: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
