//! Report assembly: the constants report, the verification suites, and the
//! JSON/CSV serializations the CLI writes. Reports are built from runtime
//! scenarios and are deterministic for a fixed config.

use crate::bounds::{self, BoundInputs};
use crate::convolution::{self, SolutionPath};
use crate::error::Result;
use crate::montecarlo::{
    self, ContinuityReport, EstimateReport, PicardReport, TailFunctional,
};
use crate::noise::NoisePath;
use crate::scenario::Runtime;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct PointBound {
    pub x: f64,
    pub bound: f64,
}

/// Every named constant of a scenario. Regime-specific entries (the strong
/// condition for p <= 1, the weighted-norm constant for p > 1) appear when
/// applicable.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub eta: f64,
    pub eta_window: f64,
    pub window: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub k_nu_horizon: f64,
    pub k_nu_window: f64,
    pub lipschitz_p: f64,
    pub growth_p: f64,
    pub phi_sup: f64,
    pub tail_bounds: Vec<PointBound>,
    pub x0_moment: f64,
    pub moment_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_condition_lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_condition_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_feasible: Option<bool>,
}

/// Compute every constant of the scenario's bound set.
pub fn run_constants(rt: &Runtime) -> Result<ConstantsReport> {
    let inputs = rt.bound_inputs()?;
    let levels = rt.tail_levels(inputs.eta_val)?;
    let tail_bounds = levels
        .iter()
        .map(|&x| PointBound { x, bound: bounds::tail_bound(&inputs, x) })
        .collect();
    let x0_moment = rt
        .ensemble
        .initial
        .moment_p(rt.ensemble.p);
    let moment = bounds::moment_bound(&inputs, x0_moment)?;

    let mut report = ConstantsReport {
        eta: inputs.eta_val,
        eta_window: inputs.eta_window_val,
        window: inputs.window,
        beta: inputs.beta,
        c1: inputs.c1,
        c2: inputs.c2,
        k_nu_horizon: bounds::k_nu(&inputs, inputs.horizon),
        k_nu_window: bounds::k_nu(&inputs, inputs.window),
        lipschitz_p: inputs.lipschitz_p,
        growth_p: inputs.growth_p,
        phi_sup: inputs.phi_sup,
        tail_bounds,
        x0_moment,
        moment_bound: moment,
        strong_condition_lhs: None,
        strong_condition_holds: None,
        contraction_constant: None,
        gamma: None,
        contraction_feasible: None,
    };

    if inputs.p <= 1.0 {
        let (holds, lhs) = bounds::check_strong_condition(&inputs)?;
        report.strong_condition_lhs = Some(lhs);
        report.strong_condition_holds = Some(holds);
    } else {
        let g = rt.ensemble.coeffs.time_factor.as_ref();
        match bounds::choose_gamma(&inputs, g) {
            Ok(gamma) => {
                report.gamma = Some(gamma);
                report.contraction_constant =
                    Some(bounds::contraction_constant(&inputs, g, gamma)?);
                report.contraction_feasible = Some(true);
            }
            Err(crate::Error::SearchFailure(_)) => {
                report.contraction_feasible = Some(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

pub fn run_tail(rt: &Runtime) -> Result<EstimateReport> {
    let inputs = rt.bound_inputs()?;
    let levels = rt.tail_levels(inputs.eta_val)?;
    montecarlo::empirical_tail(
        &rt.ensemble,
        TailFunctional::StochasticConvolution,
        &levels,
        &inputs,
    )
}

pub fn run_moment(rt: &Runtime) -> Result<EstimateReport> {
    let inputs = rt.bound_inputs()?;
    montecarlo::empirical_moment(&rt.ensemble, &rt.t_points(), &inputs)
}

pub fn run_continuity(rt: &Runtime) -> Result<ContinuityReport> {
    montecarlo::continuity_modulus(&rt.ensemble, &rt.config.analysis.h_levels)
}

/// The regime's analytic contraction value: the strong-condition left-hand
/// side for p <= 1, the weighted-norm constant at the chosen weight for
/// p > 1; infinite (vacuous) when the regime's condition cannot be met.
pub fn picard_comparison_constant(rt: &Runtime, inputs: &BoundInputs) -> Result<(f64, bool)> {
    if inputs.p <= 1.0 {
        let (holds, lhs) = bounds::check_strong_condition(inputs)?;
        Ok(if holds { (lhs, true) } else { (f64::INFINITY, false) })
    } else {
        let g = rt.ensemble.coeffs.time_factor.as_ref();
        match bounds::choose_gamma(inputs, g) {
            Ok(gamma) => Ok((bounds::contraction_constant(inputs, g, gamma)?, true)),
            Err(crate::Error::SearchFailure(_)) => Ok((f64::INFINITY, false)),
            Err(e) => Err(e),
        }
    }
}

pub fn run_picard(rt: &Runtime) -> Result<PicardReport> {
    let inputs = rt.bound_inputs()?;
    let (constant, holds) = picard_comparison_constant(rt, &inputs)?;
    montecarlo::picard_rate_study(
        &rt.ensemble,
        rt.config.analysis.tol,
        rt.config.analysis.max_iter,
        constant,
        holds,
    )
}

/// The full suite: constants plus all four studies.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: crate::scenario::ScenarioConfig,
    pub constants: ConstantsReport,
    pub tail: EstimateReport,
    pub moment: EstimateReport,
    pub continuity: ContinuityReport,
    pub picard: PicardReport,
    pub all_pass: bool,
}

pub fn run_all(rt: &Runtime) -> Result<RunReport> {
    let constants = run_constants(rt)?;
    let tail = run_tail(rt)?;
    let moment = run_moment(rt)?;
    let continuity = run_continuity(rt)?;
    let picard = run_picard(rt)?;
    let all_pass =
        tail.all_pass() && moment.all_pass() && continuity.all_pass() && picard.pass;
    Ok(RunReport {
        scenario: rt.config.clone(),
        constants,
        tail,
        moment,
        continuity,
        picard,
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// CSV rendering
// ---------------------------------------------------------------------------

/// Per-point rows of a study: `point,estimate,ci_upper,bound,pass`.
pub fn estimate_csv(report: &EstimateReport) -> String {
    let mut out = String::from("point,estimate,ci_upper,bound,pass\n");
    for i in 0..report.points.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            report.points[i], report.estimate[i], report.ci_upper[i], report.bound[i], report.pass[i]
        ));
    }
    out
}

/// Cumulative noise path: `t,Z`.
pub fn noise_csv(path: &NoisePath) -> String {
    let mut out = String::from("t,Z\n");
    for (k, z) in path.cumulative().iter().enumerate() {
        out.push_str(&format!("{},{}\n", path.grid.node(k), z));
    }
    out
}

/// Recorded big jumps: `time,size`.
pub fn big_jumps_csv(path: &NoisePath) -> String {
    let mut out = String::from("time,size\n");
    for bj in &path.big_jumps {
        out.push_str(&format!("{},{}\n", bj.time, bj.size));
    }
    out
}

/// Solution path: `t,X`.
pub fn solution_csv(path: &SolutionPath) -> String {
    let mut out = String::from("t,X\n");
    for (k, x) in path.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", path.grid.node(k), x));
    }
    out
}

/// Fixed-point distance history: `iter,distance`.
pub fn picard_csv(history: &[f64]) -> String {
    let mut out = String::from("iter,distance\n");
    for (i, d) in history.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, d));
    }
    out
}

pub fn to_json(report: &impl Serialize) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

/// Convolution value at the horizon for one simulated path (the quantity
/// the tail study thresholds); used by the path-dump subcommand.
pub fn convolution_at_end(rt: &Runtime, path_index: u64) -> Result<f64> {
    let sim = rt.ensemble.simulate_path(path_index)?;
    match &sim.solution {
        Ok(solution) => convolution::stochastic_convolution_at_end(
            &rt.ensemble.coeffs,
            &rt.ensemble.semigroup,
            &sim.noise,
            solution,
            &rt.ensemble.solver,
        ),
        Err(step) => Err(crate::Error::StateOverflow {
            step: *step,
            limit: rt.ensemble.solver.overflow_limit,
        }),
    }
}
