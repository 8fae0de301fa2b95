//! Scenario configuration: a sectioned key-value file (TOML) describing the
//! driving process, the semigroup, the coefficient presets, the simulation
//! and the analysis. One file = one scenario.

use crate::bounds::{BoundInputs, ConjugateConvention};
use crate::coeffs::{AmplitudePreset, CoefficientSpec, DriftPreset, TimeFactorPreset};
use crate::convolution::{self, JumpPlacement, SemigroupParams, SolverOptions};
use crate::error::{Error, Result};
use crate::levy::StableCharacteristics;
use crate::montecarlo::{EnsembleConfig, InitialValue};
use crate::noise::{route, PathGrid, SmallJumpPolicy};
use serde::{Deserialize, Serialize};

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub alpha: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Drift parameter; defaults to 0, or to the strict-drift value when
    /// `strict_drift` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub strict_drift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupConfig {
    /// Decay rate of S(t) = exp(-a t).
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub f: DriftPreset,
    pub g: TimeFactorPreset,
    pub phi: AmplitudePreset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialConfig {
    Const { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Horizon T (time units).
    pub t_end: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Path generator: "exact" or "truncated".
    pub route: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_jump_cutoff: Option<f64>,
    #[serde(default = "default_policy")]
    pub small_jump_policy: SmallJumpPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_budget: Option<f64>,
    pub initial: InitialConfig,
    /// High-fidelity placement of recorded big jumps at their arrival times.
    #[serde(default)]
    pub split_jumps: bool,
}

fn default_policy() -> SmallJumpPolicy {
    SmallJumpPolicy::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Moment order p, in (0, alpha).
    pub p: f64,
    /// Explicit tail levels; empty means a geometric grid from eta.
    #[serde(default)]
    pub x_levels: Vec<f64>,
    #[serde(default = "default_x_level_count")]
    pub x_level_count: usize,
    #[serde(default = "default_x_level_max_ratio")]
    pub x_level_max_ratio: f64,
    #[serde(default = "default_t_point_count")]
    pub t_point_count: usize,
    #[serde(default = "default_h_levels")]
    pub h_levels: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub conjugate_convention: ConjugateConvention,
}

fn default_x_level_count() -> usize {
    12
}
fn default_x_level_max_ratio() -> f64 {
    50.0
}
fn default_t_point_count() -> usize {
    16
}
fn default_h_levels() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    50
}

/// A full scenario as read from (and echoed to) a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub process: ProcessConfig,
    pub semigroup: SemigroupConfig,
    pub coefficients: CoefficientsConfig,
    pub simulation: SimulationConfig,
    pub analysis: AnalysisConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| config_err("<toml>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// The drift parameter after applying the strict-drift convention.
    pub fn resolved_drift(&self) -> Result<f64> {
        let p = &self.process;
        if p.strict_drift {
            if p.alpha <= 1.0 {
                return Err(config_err(
                    "process.strict_drift",
                    "the strict-drift convention applies only for alpha in (1, 2)",
                ));
            }
            let derived = -(p.c_plus - p.c_minus) / (p.alpha - 1.0);
            if let Some(b) = p.b {
                if (b - derived).abs() > 1e-12 * (1.0 + derived.abs()) {
                    return Err(config_err(
                        "process.b",
                        format!("conflicts with the strict-drift value {derived}"),
                    ));
                }
            }
            Ok(derived)
        } else {
            Ok(p.b.unwrap_or(0.0))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.process;
        if !p.alpha.is_finite() || p.alpha <= 0.0 || p.alpha >= 2.0 {
            return Err(config_err(
                "process.alpha",
                format!("must lie in the open interval (0, 2), got {}", p.alpha),
            ));
        }
        let b = self.resolved_drift()?;
        StableCharacteristics::new(p.alpha, p.c_plus, p.c_minus, b)
            .map_err(|e| config_err("process", e.to_string()))?;

        if !(self.semigroup.a > 0.0) || !self.semigroup.a.is_finite() {
            return Err(config_err(
                "semigroup.a",
                format!("decay rate must be positive and finite, got {}", self.semigroup.a),
            ));
        }

        let sim = &self.simulation;
        PathGrid::new(sim.t_end, sim.n_steps).map_err(|e| config_err("simulation", e.to_string()))?;
        if sim.n_paths < 2 {
            return Err(config_err("simulation.n_paths", "need at least 2 paths"));
        }
        match sim.route.as_str() {
            "exact" => {}
            "truncated" => {
                let r = sim.truncation_level.ok_or_else(|| {
                    config_err("simulation.truncation_level", "required for the truncated route")
                })?;
                let eps = sim.small_jump_cutoff.ok_or_else(|| {
                    config_err("simulation.small_jump_cutoff", "required for the truncated route")
                })?;
                if !(r >= 1.0) {
                    return Err(config_err(
                        "simulation.truncation_level",
                        format!("must be at least 1, got {r}"),
                    ));
                }
                if !(eps > 0.0 && eps < r) {
                    return Err(config_err(
                        "simulation.small_jump_cutoff",
                        format!("must lie in (0, truncation_level) = (0, {r}), got {eps}"),
                    ));
                }
            }
            other => {
                return Err(config_err(
                    "simulation.route",
                    format!("unknown route `{other}`; known: {:?}", route::route_names()),
                ))
            }
        }
        if let InitialConfig::Uniform { lo, hi } = sim.initial {
            if !(lo < hi) {
                return Err(config_err("simulation.initial", format!("need lo < hi, got [{lo}, {hi}]")));
            }
        }

        let an = &self.analysis;
        if !(an.p > 0.0 && an.p < p.alpha) {
            return Err(config_err(
                "analysis.p",
                format!(
                    "moment order must lie in (0, alpha) = (0, {}), got {}",
                    p.alpha, an.p
                ),
            ));
        }
        if an.x_levels.is_empty() {
            if an.x_level_count < 2 {
                return Err(config_err("analysis.x_level_count", "need at least 2 levels"));
            }
            if !(an.x_level_max_ratio > 1.0) {
                return Err(config_err("analysis.x_level_max_ratio", "must exceed 1"));
            }
        } else if an.x_levels.windows(2).any(|w| w[1] <= w[0]) || an.x_levels[0] <= 0.0 {
            return Err(config_err(
                "analysis.x_levels",
                "levels must be positive and strictly increasing",
            ));
        }
        if an.t_point_count == 0 {
            return Err(config_err("analysis.t_point_count", "need at least one point"));
        }
        if an.h_levels.len() < 2 {
            return Err(config_err("analysis.h_levels", "need at least two windows"));
        }
        if an.h_levels.windows(2).any(|w| w[1] >= w[0]) {
            return Err(config_err("analysis.h_levels", "windows must be strictly decreasing"));
        }
        let h_min = *an.h_levels.last().unwrap();
        let dt = sim.t_end / sim.n_steps as f64;
        if !(h_min >= 2.0 * dt) {
            return Err(config_err(
                "analysis.h_levels",
                format!("smallest window {h_min} is below twice the grid resolution {dt}"),
            ));
        }
        if an.h_levels[0] >= sim.t_end {
            return Err(config_err("analysis.h_levels", "windows must stay below the horizon"));
        }
        if !(an.tol > 0.0) {
            return Err(config_err("analysis.tol", "tolerance must be positive"));
        }
        if an.max_iter == 0 {
            return Err(config_err("analysis.max_iter", "need at least one iteration"));
        }
        // coefficient presets must build (certification constraints)
        self.coefficients
            .f
            .build(an.p)
            .map_err(|e| config_err("coefficients.f", e.to_string()))?;
        self.coefficients
            .g
            .build()
            .map_err(|e| config_err("coefficients.g", e.to_string()))?;
        self.coefficients
            .phi
            .build()
            .map_err(|e| config_err("coefficients.phi", e.to_string()))?;
        Ok(())
    }

    /// Assemble the runtime objects of the scenario.
    pub fn build(&self) -> Result<Runtime> {
        self.validate()?;
        let b = self.resolved_drift()?;
        let chars = StableCharacteristics::new(self.process.alpha, self.process.c_plus, self.process.c_minus, b)?;
        let semigroup = SemigroupParams::new(self.semigroup.a)?;
        let grid = PathGrid::new(self.simulation.t_end, self.simulation.n_steps)?;
        let route = route::build_route(
            &self.simulation.route,
            self.simulation.truncation_level,
            self.simulation.small_jump_cutoff,
            self.simulation.small_jump_policy,
            self.simulation.jump_budget,
        )?;
        let coeffs = CoefficientSpec {
            drift: self.coefficients.f.build(self.analysis.p)?,
            time_factor: self.coefficients.g.build()?,
            amplitude: self.coefficients.phi.build()?,
        };
        let initial = match self.simulation.initial {
            InitialConfig::Const { value } => InitialValue::Deterministic(value),
            InitialConfig::Uniform { lo, hi } => InitialValue::Uniform { lo, hi },
        };
        let solver = SolverOptions {
            jump_placement: if self.simulation.split_jumps {
                JumpPlacement::SplitAtJump
            } else {
                JumpPlacement::EndOfStep
            },
            ..Default::default()
        };
        let ensemble = EnsembleConfig {
            n_paths: self.simulation.n_paths,
            grid,
            master_seed: self.simulation.seed,
            chars,
            semigroup,
            coeffs,
            route,
            initial,
            p: self.analysis.p,
            solver,
        };
        Ok(Runtime {
            config: self.clone(),
            ensemble,
        })
    }
}

/// Runtime objects of one scenario plus the analysis settings.
pub struct Runtime {
    pub config: ScenarioConfig,
    pub ensemble: EnsembleConfig,
}

impl Runtime {
    /// The scalars feeding every closed-form bound, with the weighted
    /// energies of g computed here. The reported window is the finest
    /// continuity window.
    pub fn bound_inputs(&self) -> Result<BoundInputs> {
        let a = self.ensemble.semigroup.decay();
        let t_end = self.ensemble.grid.t_end();
        let g = self.ensemble.coeffs.time_factor.as_ref();
        let window = *self.config.analysis.h_levels.last().unwrap();
        let tail = self.ensemble.chars.tail_bounds();
        let inputs = BoundInputs {
            decay: a,
            drift: self.ensemble.chars.drift(),
            phi_sup: self.ensemble.coeffs.amplitude.sup_norm(),
            horizon: t_end,
            window,
            beta: tail.beta,
            p: self.ensemble.p,
            c1: tail.c1,
            c2: tail.c2,
            lipschitz_p: self.ensemble.coeffs.drift.lipschitz_p(),
            growth_p: self.ensemble.coeffs.drift.growth_p(),
            eta_val: convolution::eta(a, t_end, g)?,
            eta_window_val: convolution::eta_window(a, t_end, g, window)?,
            convention: self.config.analysis.conjugate_convention,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// The tail levels: explicit from the config, otherwise geometric from
    /// eta up to `x_level_max_ratio * eta`.
    pub fn tail_levels(&self, eta_val: f64) -> Result<Vec<f64>> {
        let an = &self.config.analysis;
        if !an.x_levels.is_empty() {
            return Ok(an.x_levels.clone());
        }
        if !(eta_val > 0.0) {
            return Err(config_err(
                "analysis.x_levels",
                "eta vanishes for this scenario; give explicit positive levels",
            ));
        }
        let count = an.x_level_count;
        let ratio = an.x_level_max_ratio;
        Ok((0..count)
            .map(|i| eta_val * ratio.powf(i as f64 / (count - 1) as f64))
            .collect())
    }

    /// Moment evaluation times: evenly spaced in (0, T].
    pub fn t_points(&self) -> Vec<f64> {
        let count = self.config.analysis.t_point_count;
        let t_end = self.ensemble.grid.t_end();
        (1..=count).map(|i| i as f64 * t_end / count as f64).collect()
    }
}

/// The default shipped scenario: the scalar equation with symmetric stable
/// noise, unit decay and unit-constant noise coefficients.
pub fn default_scenario_toml() -> &'static str {
    r#"# Default scenario: scalar semilinear equation driven by symmetric
# stable noise. Times are in abstract units; rates are per unit time.

[process]
alpha = 1.5    # stability index, in (0, 2)
c_plus = 0.5   # right tail weight of the jump density
c_minus = 0.5  # left tail weight
b = 0.0        # drift; symmetric case is strictly stable with b = 0

[semigroup]
a = 1.0        # S(t) = exp(-a t), a > 0

[coefficients]
f = { preset = "affine", slope = 0.25, intercept = 0.0 }
g = { preset = "const", value = 1.0 }
phi = { preset = "const", value = 1.0 }

[simulation]
t_end = 1.0    # horizon (time units)
n_steps = 4096
n_paths = 2000
seed = 20240901
route = "exact"            # exact | truncated
initial = { kind = "const", value = 1.0 }

[analysis]
p = 0.75                   # moment order, must stay below alpha
x_level_count = 12         # geometric tail levels from eta to 50 eta
x_level_max_ratio = 50.0
t_point_count = 16
h_levels = [0.2, 0.1, 0.05, 0.025]
tol = 1e-10
max_iter = 50
conjugate_convention = "unit"
"#
}
