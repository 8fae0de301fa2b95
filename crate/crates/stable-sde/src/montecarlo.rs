//! Reproducible parallel ensembles of solver paths, reduced into empirical
//! tail probabilities, moments, continuity moduli and fixed-point rate
//! studies, each compared against the analytic bounds.
//!
//! Every path owns one independent random stream keyed by
//! `(master_seed, path_index)`, so results are bit-identical across thread
//! counts; reductions run in fixed path order.

use crate::bounds::{self, BoundInputs};
use crate::coeffs::CoefficientSpec;
use crate::convolution::{
    self, SemigroupParams, SolutionPath, SolverOptions,
};
use crate::error::{Error, Result};
use crate::levy::StableCharacteristics;
use crate::noise::{NoisePath, NoiseRoute, PathGrid, SeedSpec};
use crate::stats;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Stream salt for drawing the initial value, keeping it independent of the
/// noise stream of the same path.
const X0_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
/// Stream salt for bootstrap resampling.
const BOOTSTRAP_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// Initial value of the ensemble: fixed or sampled per path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialValue {
    Deterministic(f64),
    Uniform { lo: f64, hi: f64 },
}

impl InitialValue {
    fn draw(&self, master_seed: u64, path_index: u64) -> f64 {
        match *self {
            InitialValue::Deterministic(v) => v,
            InitialValue::Uniform { lo, hi } => {
                let mut rng = SeedSpec::new(master_seed ^ X0_SALT, path_index).rng();
                lo + (hi - lo) * rng.random::<f64>()
            }
        }
    }

    /// Analytic `E|x0|^p` when available (deterministic and uniform laws).
    pub fn moment_p(&self, p: f64) -> f64 {
        match *self {
            InitialValue::Deterministic(v) => v.abs().powf(p),
            InitialValue::Uniform { lo, hi } => {
                let anti = |x: f64| x.signum() * x.abs().powf(p + 1.0) / (p + 1.0);
                (anti(hi) - anti(lo)) / (hi - lo)
            }
        }
    }
}

/// Full specification of one ensemble: scenario objects plus size and seed.
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub grid: PathGrid,
    pub master_seed: u64,
    pub chars: StableCharacteristics,
    pub semigroup: SemigroupParams,
    pub coeffs: CoefficientSpec,
    pub route: Box<dyn NoiseRoute>,
    pub initial: InitialValue,
    pub p: f64,
    pub solver: SolverOptions,
}

/// One simulated path: the noise realization, the solution (or the step at
/// which it overflowed) and the initial value used.
pub struct SimulatedPath {
    pub noise: NoisePath,
    pub solution: std::result::Result<SolutionPath, usize>,
    pub x0: f64,
}

impl SimulatedPath {
    pub fn is_flagged(&self) -> bool {
        self.solution.is_err()
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidParameter(
                "ensembles need at least two paths for any variance estimate".into(),
            ));
        }
        if !(self.p > 0.0 && self.p < self.chars.alpha()) {
            return Err(Error::InvalidParameter(format!(
                "moment order must lie in (0, alpha) = (0, {}), got {}",
                self.chars.alpha(),
                self.p
            )));
        }
        Ok(())
    }

    /// Simulate one path. Overflowed solutions are kept as flagged values,
    /// not errors; everything else propagates.
    pub fn simulate_path(&self, path_index: u64) -> Result<SimulatedPath> {
        let seed = SeedSpec::new(self.master_seed, path_index);
        let noise = self.route.sample_path(&self.chars, &self.grid, seed)?;
        let x0 = self.initial.draw(self.master_seed, path_index);
        let solution = match convolution::euler_solve(
            x0,
            &self.coeffs,
            &self.semigroup,
            &noise,
            &self.solver,
        ) {
            Ok(path) => Ok(path),
            Err(Error::StateOverflow { step, .. }) => Err(step),
            Err(other) => return Err(other),
        };
        Ok(SimulatedPath { noise, solution, x0 })
    }

    /// Run the ensemble, mapping each path through `extract` in parallel and
    /// returning the summaries in path order.
    pub fn map_paths<T, F>(&self, extract: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &SimulatedPath) -> Result<T> + Sync,
    {
        (0..self.n_paths as u64)
            .into_par_iter()
            .map(|i| {
                let path = self.simulate_path(i)?;
                extract(i, &path)
            })
            .collect()
    }
}

/// Which scalar of each path the tail study thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFunctional {
    /// The stochastic convolution (the noise part of the solution) at the
    /// horizon; the quantity the tail bound controls.
    StochasticConvolution,
    /// The full solution value at the horizon.
    Solution,
}

/// Point-wise estimate/bound comparison of one study.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub quantity: String,
    /// Evaluation points (levels x, times t or windows h).
    pub points: Vec<f64>,
    pub estimate: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub bound: Vec<f64>,
    pub pass: Vec<bool>,
    pub n_effective: usize,
    pub flagged_paths: usize,
}

impl EstimateReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&b| b)
    }
}

/// Empirical exceedance fractions of the selected functional at `x_levels`,
/// with exact binomial upper confidence bounds, dominated by the analytic
/// tail bound. Flagged (overflowed) paths count as exceedances at every
/// level.
pub fn empirical_tail(
    cfg: &EnsembleConfig,
    functional: TailFunctional,
    x_levels: &[f64],
    inputs: &BoundInputs,
) -> Result<EstimateReport> {
    cfg.validate()?;
    inputs.validate()?;
    if x_levels.is_empty() {
        return Err(Error::InvalidParameter("no tail levels requested".into()));
    }
    if let Some(&bad) = x_levels.iter().find(|&&x| x < inputs.eta_val) {
        return Err(Error::Config {
            field: "analysis.x_levels".into(),
            message: format!(
                "level {bad} is below the tail threshold eta = {}; the bound is only asserted from eta upward",
                inputs.eta_val
            ),
        });
    }

    let values = cfg.map_paths(|_, path| {
        Ok(match &path.solution {
            Ok(solution) => {
                let v = match functional {
                    TailFunctional::StochasticConvolution => convolution::stochastic_convolution_at_end(
                        &cfg.coeffs,
                        &cfg.semigroup,
                        &path.noise,
                        solution,
                        &cfg.solver,
                    )?,
                    TailFunctional::Solution => solution.end_value(),
                };
                Some(v.abs())
            }
            Err(_) => None,
        })
    })?;

    let n = values.len();
    let flagged = values.iter().filter(|v| v.is_none()).count();
    let mut estimate = Vec::with_capacity(x_levels.len());
    let mut ci_upper = Vec::with_capacity(x_levels.len());
    let mut bound = Vec::with_capacity(x_levels.len());
    let mut pass = Vec::with_capacity(x_levels.len());
    for &x in x_levels {
        let exceed = values
            .iter()
            .filter(|v| match v {
                Some(value) => *value >= x,
                None => true, // flagged: counted as an exceedance
            })
            .count();
        let est = exceed as f64 / n as f64;
        let upper = stats::clopper_pearson_upper(exceed, n, 0.99);
        let b = bounds::tail_bound(inputs, x);
        estimate.push(est);
        ci_upper.push(upper);
        bound.push(b);
        pass.push(upper <= b);
    }

    Ok(EstimateReport {
        quantity: "tail exceedance".into(),
        points: x_levels.to_vec(),
        estimate,
        ci_upper,
        bound,
        pass,
        n_effective: n,
        flagged_paths: flagged,
    })
}

/// Snap a time to the nearest grid node index.
fn node_index(grid: &PathGrid, t: f64) -> usize {
    let k = (t / grid.dt()).round() as i64;
    k.clamp(0, grid.n_steps() as i64) as usize
}

/// Empirical p-th moments of the solution at `t_points` (snapped to grid
/// nodes), with percentile-bootstrap upper confidence bounds, dominated by
/// the uniform analytic moment bound.
pub fn empirical_moment(
    cfg: &EnsembleConfig,
    t_points: &[f64],
    inputs: &BoundInputs,
) -> Result<EstimateReport> {
    cfg.validate()?;
    inputs.validate()?;
    if t_points.is_empty() {
        return Err(Error::InvalidParameter("no time points requested".into()));
    }
    let p = cfg.p;
    let nodes: Vec<usize> = t_points.iter().map(|&t| node_index(&cfg.grid, t)).collect();

    struct MomentRow {
        x0_pow: f64,
        powers: Option<Vec<f64>>,
    }

    let rows = cfg.map_paths(|_, path| {
        let powers = match &path.solution {
            Ok(solution) => Some(
                nodes
                    .iter()
                    .map(|&k| solution.values[k].abs().powf(p))
                    .collect::<Vec<f64>>(),
            ),
            Err(_) => None,
        };
        Ok(MomentRow {
            x0_pow: path.x0.abs().powf(p),
            powers,
        })
    })?;

    let flagged = rows.iter().filter(|r| r.powers.is_none()).count();
    let n_effective = rows.len() - flagged;
    if n_effective == 0 {
        return Err(Error::EmptyEnsemble);
    }

    // analytic initial moment when deterministic, empirical otherwise
    let x0_moment = match cfg.initial {
        InitialValue::Deterministic(_) => cfg.initial.moment_p(p),
        InitialValue::Uniform { .. } => {
            rows.iter().map(|r| r.x0_pow).sum::<f64>() / rows.len() as f64
        }
    };
    let analytic = bounds::moment_bound(inputs, x0_moment)?;

    let mut estimate = Vec::with_capacity(nodes.len());
    let mut ci_upper = Vec::with_capacity(nodes.len());
    let mut bound = Vec::with_capacity(nodes.len());
    let mut pass = Vec::with_capacity(nodes.len());
    let mut column = Vec::with_capacity(n_effective);
    for (j, _) in nodes.iter().enumerate() {
        column.clear();
        column.extend(
            rows.iter()
                .filter_map(|r| r.powers.as_ref().map(|pw| pw[j])),
        );
        let mean = column.iter().sum::<f64>() / column.len() as f64;
        let mut rng = SeedSpec::new(cfg.master_seed ^ BOOTSTRAP_SALT, j as u64).rng();
        let upper = stats::bootstrap_mean_upper(&column, 1000, 0.99, &mut rng);
        estimate.push(mean);
        ci_upper.push(upper);
        bound.push(analytic);
        pass.push(upper <= analytic);
    }

    Ok(EstimateReport {
        quantity: "p-th moment".into(),
        points: nodes.iter().map(|&k| cfg.grid.node(k)).collect(),
        estimate,
        ci_upper,
        bound,
        pass,
        n_effective,
        flagged_paths: flagged,
    })
}

/// Continuity study: the modulus plus the monotone-trend verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub report: EstimateReport,
    /// Rank correlation of the modulus against the window size; positive
    /// means the modulus shrinks with the window, as continuity demands.
    pub spearman: f64,
    pub trend_pass: bool,
}

impl ContinuityReport {
    pub fn all_pass(&self) -> bool {
        self.trend_pass && self.report.all_pass()
    }
}

/// Empirical continuity modulus `sup_t mean |X(t+h) - X(t)|^p` per window.
///
/// Windows are snapped to whole grid steps. The decreasing-trend check runs
/// point-wise: each modulus must stay below the upper confidence bound of
/// the previous (coarser) window (strict decrease up to CI overlap), and
/// the rank correlation against h must be positive.
pub fn continuity_modulus(cfg: &EnsembleConfig, h_levels: &[f64]) -> Result<ContinuityReport> {
    cfg.validate()?;
    if h_levels.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two window levels for a trend".into(),
        ));
    }
    let dt = cfg.grid.dt();
    let n = cfg.grid.n_steps();
    if h_levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "window levels must be strictly decreasing".into(),
        ));
    }
    let last = *h_levels.last().unwrap();
    if !(last > 0.0) || last < 2.0 * dt {
        return Err(Error::InvalidParameter(format!(
            "smallest window {last} is below twice the grid resolution {dt}"
        )));
    }
    if h_levels[0] >= cfg.grid.t_end() {
        return Err(Error::InvalidParameter(
            "largest window must stay below the horizon".into(),
        ));
    }

    let steps: Vec<usize> = h_levels.iter().map(|&h| ((h / dt).round() as usize).max(1)).collect();
    let snapped: Vec<f64> = steps.iter().map(|&m| m as f64 * dt).collect();
    let p = cfg.p;

    // pass 1: accumulate per-node sums of |X(t+h) - X(t)|^p.
    // Paths are processed in fixed-size chunks and chunk accumulators are
    // combined in chunk order, so the float summation order (hence the
    // result, bit for bit) does not depend on the thread count.
    struct Sums {
        per_level: Vec<Vec<f64>>,
        used: usize,
        flagged: usize,
    }
    let zero = || Sums {
        per_level: steps.iter().map(|&m| vec![0.0; n + 1 - m]).collect(),
        used: 0,
        flagged: 0,
    };
    const CHUNK: u64 = 64;
    let n_chunks = (cfg.n_paths as u64).div_ceil(CHUNK);
    let chunk_sums: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Sums> {
            let mut acc = zero();
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(cfg.n_paths as u64);
            for i in lo..hi {
                let path = cfg.simulate_path(i)?;
                match &path.solution {
                    Ok(solution) => {
                        for (lvl, &m) in steps.iter().enumerate() {
                            let slot = &mut acc.per_level[lvl];
                            for (k, cell) in slot.iter_mut().enumerate() {
                                *cell +=
                                    (solution.values[k + m] - solution.values[k]).abs().powf(p);
                            }
                        }
                        acc.used += 1;
                    }
                    Err(_) => acc.flagged += 1,
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Sums>>>()?;
    let sums = chunk_sums.into_iter().fold(zero(), |mut a, b| {
        for (x, y) in a.per_level.iter_mut().zip(b.per_level) {
            for (u, v) in x.iter_mut().zip(y) {
                *u += v;
            }
        }
        a.used += b.used;
        a.flagged += b.flagged;
        a
    });

    if sums.used == 0 {
        return Err(Error::EmptyEnsemble);
    }

    // argmax node of the empirical modulus per level
    let argmax: Vec<usize> = sums
        .per_level
        .iter()
        .map(|slot| {
            slot.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap_or(0)
        })
        .collect();
    let modulus: Vec<f64> = sums
        .per_level
        .iter()
        .zip(&argmax)
        .map(|(slot, &k)| slot[k] / sums.used as f64)
        .collect();

    // pass 2: re-simulate (identical streams) and collect the per-path
    // values at the attaining nodes for the bootstrap
    let per_path = cfg.map_paths(|_, path| {
        Ok(path.solution.as_ref().ok().map(|solution| {
            steps
                .iter()
                .zip(&argmax)
                .map(|(&m, &k)| (solution.values[k + m] - solution.values[k]).abs().powf(p))
                .collect::<Vec<f64>>()
        }))
    })?;

    let mut ci_upper = Vec::with_capacity(steps.len());
    let mut column = Vec::with_capacity(sums.used);
    for lvl in 0..steps.len() {
        column.clear();
        column.extend(per_path.iter().filter_map(|r| r.as_ref().map(|v| v[lvl])));
        let mut rng = SeedSpec::new(cfg.master_seed ^ BOOTSTRAP_SALT, 1000 + lvl as u64).rng();
        ci_upper.push(stats::bootstrap_mean_upper(&column, 1000, 0.99, &mut rng));
    }

    // trend: each modulus below the previous level's upper CI
    let mut bound = Vec::with_capacity(steps.len());
    let mut pass = Vec::with_capacity(steps.len());
    for lvl in 0..steps.len() {
        if lvl == 0 {
            bound.push(f64::INFINITY);
            pass.push(true);
        } else {
            bound.push(ci_upper[lvl - 1]);
            pass.push(modulus[lvl] <= ci_upper[lvl - 1]);
        }
    }
    let rho = stats::spearman(&snapped, &modulus);

    let report = EstimateReport {
        quantity: "continuity modulus".into(),
        points: snapped,
        estimate: modulus,
        ci_upper,
        bound,
        pass,
        n_effective: sums.used,
        flagged_paths: sums.flagged,
    };
    Ok(ContinuityReport {
        trend_pass: rho > 0.0 && report.all_pass(),
        spearman: rho,
        report,
    })
}

/// Outcome of the fixed-point rate study.
#[derive(Debug, Clone, Serialize)]
pub struct PicardReport {
    pub n_paths: usize,
    pub converged: usize,
    pub non_converged_paths: Vec<u64>,
    pub mean_iterations: f64,
    /// Largest successive-distance ratio observed across paths.
    pub max_ratio: f64,
    /// The regime's analytic contraction value the ratios are compared to
    /// (strong-condition left-hand side for p <= 1, weighted-norm constant
    /// at the chosen weight for p > 1); infinite when no guarantee applies.
    pub analytic_constant: f64,
    /// Whether the regime's smallness condition actually holds; when it
    /// does not, no contraction is guaranteed and the comparison is vacuous.
    pub condition_holds: bool,
    /// Largest pathwise distance between the fixed point and the direct
    /// solver output.
    pub max_distance_to_direct: f64,
    pub direct_match_tol: f64,
    pub ratio_slack: f64,
    pub pass: bool,
    /// Distance history of the first path, for dump/plotting.
    pub first_path_history: Vec<f64>,
}

/// Per-path Picard iteration: distance ratios against the analytic
/// contraction value, and agreement of the fixed point with the direct
/// solver.
pub fn picard_rate_study(
    cfg: &EnsembleConfig,
    tol: f64,
    max_iter: usize,
    analytic_constant: f64,
    condition_holds: bool,
) -> Result<PicardReport> {
    cfg.validate()?;
    const RATIO_SLACK: f64 = 0.05;
    const DIRECT_MATCH_TOL: f64 = 1e-8;

    struct PathStudy {
        history: Vec<f64>,
        converged: bool,
        distance_to_direct: f64,
    }

    let studies = cfg.map_paths(|_, path| {
        let x0 = path.x0;
        let outcome = convolution::picard_solve(
            x0,
            &cfg.coeffs,
            &cfg.semigroup,
            &path.noise,
            cfg.p,
            tol,
            max_iter,
            &cfg.solver,
        );
        Ok(match outcome {
            Ok((fixed, history)) => {
                let direct = path
                    .solution
                    .as_ref()
                    .map_err(|&step| Error::StateOverflow { step, limit: cfg.solver.overflow_limit })?;
                let d = bounds::metric_dp(&fixed, direct, cfg.p)?;
                PathStudy { history, converged: true, distance_to_direct: d }
            }
            Err(Error::NonConvergence { history, .. }) => PathStudy {
                history,
                converged: false,
                distance_to_direct: f64::INFINITY,
            },
            Err(other) => return Err(other),
        })
    })?;

    let mut max_ratio = 0.0f64;
    let mut max_distance = 0.0f64;
    let mut converged = 0usize;
    let mut non_converged = Vec::new();
    let mut total_iters = 0usize;
    for (i, s) in studies.iter().enumerate() {
        if s.converged {
            converged += 1;
            max_distance = max_distance.max(s.distance_to_direct);
        } else {
            non_converged.push(i as u64);
        }
        total_iters += s.history.len();
        for w in s.history.windows(2) {
            if w[0] > 0.0 {
                max_ratio = max_ratio.max(w[1] / w[0]);
            }
        }
    }

    let pass = non_converged.is_empty()
        && max_ratio <= analytic_constant + RATIO_SLACK
        && max_distance < DIRECT_MATCH_TOL;

    Ok(PicardReport {
        n_paths: studies.len(),
        converged,
        non_converged_paths: non_converged,
        mean_iterations: total_iters as f64 / studies.len() as f64,
        max_ratio,
        analytic_constant,
        condition_holds,
        max_distance_to_direct: max_distance,
        direct_match_tol: DIRECT_MATCH_TOL,
        ratio_slack: RATIO_SLACK,
        pass,
        first_path_history: studies.first().map(|s| s.history.clone()).unwrap_or_default(),
    })
}
