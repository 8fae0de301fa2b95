//! Scenario-driven front end: parses a config file, runs the named
//! verification suite, writes reports and plot data.
//!
//! Exit codes: 0 when every pass flag is true, 1 on verification failure,
//! 2 on config errors (with field diagnostics), 3 on runtime failures
//! (non-convergence, overflow budget, IO).

use clap::{Parser, Subcommand};
use stable_sde::montecarlo::{ContinuityReport, EstimateReport, PicardReport};
use stable_sde::report::{self, ConstantsReport};
use stable_sde::scenario::{Runtime, ScenarioConfig};
use stable_sde::Error as LibError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stable-sde", about = "Simulation and bound verification for stable-noise evolution equations", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the number of paths.
    #[arg(long, global = true)]
    paths: Option<usize>,

    /// Worker thread count (must not change any result).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Echo the parsed, normalized scenario and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Dump one noise path and its solution as CSV.
    Simulate,
    /// Evaluate every closed-form constant and bound of the scenario.
    Constants,
    /// Empirical tail probabilities against the tail bound.
    VerifyTail,
    /// Empirical p-th moments against the moment bound.
    VerifyMoment,
    /// Continuity modulus trend across shrinking windows.
    VerifyContinuity,
    /// Fixed-point iteration rate study.
    Picard,
    /// The full suite.
    All,
}

enum Outcome {
    Pass,
    Fail,
    /// The run itself could not do its job (e.g. non-convergent paths);
    /// reports are still written.
    RuntimeFail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Ok(Outcome::RuntimeFail) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<LibError>() {
                Some(LibError::Config { .. }) | Some(LibError::InvalidParameter(_)) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let config_path = cli.config.as_ref().ok_or_else(|| {
        anyhow::Error::new(LibError::Config {
            field: "--config".into(),
            message: "a scenario file is required".into(),
        })
    })?;
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        anyhow::Error::new(LibError::Config {
            field: "--config".into(),
            message: format!("cannot read {}: {e}", config_path.display()),
        })
    })?;
    let mut config = ScenarioConfig::from_toml(&text)?;

    if let Some(seed) = cli.seed {
        config.simulation.seed = seed;
    }
    if let Some(paths) = cli.paths {
        config.simulation.n_paths = paths;
    }
    config.validate()?;

    if cli.print_config {
        print!("{}", config.to_toml());
        return Ok(Outcome::Pass);
    }

    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    }

    let runtime = config.build()?;
    std::fs::create_dir_all(&cli.out)?;

    match cli.command {
        Command::Simulate => simulate(&runtime, &cli.out),
        Command::Constants => constants(&runtime, &cli.out),
        Command::VerifyTail => verify_tail(&runtime, &cli.out),
        Command::VerifyMoment => verify_moment(&runtime, &cli.out),
        Command::VerifyContinuity => verify_continuity(&runtime, &cli.out),
        Command::Picard => picard(&runtime, &cli.out),
        Command::All => all(&runtime, &cli.out),
    }
}

/// Report files are never left half-written: write to a temp sibling, then
/// rename into place.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Single-study report wrapper mirroring the full-suite shape.
#[derive(serde::Serialize)]
struct SuiteReport<'a> {
    scenario: &'a ScenarioConfig,
    constants: &'a ConstantsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<&'a EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    moment: Option<&'a EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    continuity: Option<&'a ContinuityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    picard: Option<&'a PicardReport>,
    all_pass: bool,
}

impl<'a> SuiteReport<'a> {
    fn new(scenario: &'a ScenarioConfig, constants: &'a ConstantsReport, all_pass: bool) -> Self {
        Self {
            scenario,
            constants,
            tail: None,
            moment: None,
            continuity: None,
            picard: None,
            all_pass,
        }
    }
}

fn simulate(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let sim = rt.ensemble.simulate_path(0)?;
    write_atomic(&out.join("paths.csv"), &report::noise_csv(&sim.noise))?;
    if sim.noise.truncation_level.is_some() {
        write_atomic(&out.join("big_jumps.csv"), &report::big_jumps_csv(&sim.noise))?;
    }
    match &sim.solution {
        Ok(solution) => {
            write_atomic(&out.join("solution.csv"), &report::solution_csv(solution))?;
            println!(
                "simulate: PASS (wrote paths.csv and solution.csv; {} steps, route {})",
                sim.noise.grid.n_steps(),
                rt.config.simulation.route
            );
            Ok(Outcome::Pass)
        }
        Err(step) => Err(anyhow::Error::new(LibError::StateOverflow {
            step: *step,
            limit: rt.ensemble.solver.overflow_limit,
        })),
    }
}

fn constants(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let constants = report::run_constants(rt)?;
    let suite = SuiteReport::new(&rt.config, &constants, true);
    write_atomic(&out.join("report.json"), &report::to_json(&suite))?;
    println!(
        "constants: PASS (eta = {:.6}, K(T) = {:.6}; report.json written)",
        constants.eta, constants.k_nu_horizon
    );
    Ok(Outcome::Pass)
}

fn study_line(name: &str, report: &EstimateReport) -> String {
    let ok = report.all_pass();
    format!(
        "{name}: {} ({}/{} points dominated; {} flagged paths)",
        if ok { "PASS" } else { "FAIL" },
        report.pass.iter().filter(|&&b| b).count(),
        report.pass.len(),
        report.flagged_paths,
    )
}

fn verify_tail(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let constants = report::run_constants(rt)?;
    let tail = report::run_tail(rt)?;
    let ok = tail.all_pass();
    let mut suite = SuiteReport::new(&rt.config, &constants, ok);
    suite.tail = Some(&tail);
    write_atomic(&out.join("report.json"), &report::to_json(&suite))?;
    write_atomic(&out.join("tail.csv"), &report::estimate_csv(&tail))?;
    println!("{}", study_line("verify-tail", &tail));
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn verify_moment(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let constants = report::run_constants(rt)?;
    let moment = report::run_moment(rt)?;
    let ok = moment.all_pass();
    let mut suite = SuiteReport::new(&rt.config, &constants, ok);
    suite.moment = Some(&moment);
    write_atomic(&out.join("report.json"), &report::to_json(&suite))?;
    write_atomic(&out.join("moment.csv"), &report::estimate_csv(&moment))?;
    println!("{}", study_line("verify-moment", &moment));
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn verify_continuity(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let constants = report::run_constants(rt)?;
    let continuity = report::run_continuity(rt)?;
    let ok = continuity.all_pass();
    let mut suite = SuiteReport::new(&rt.config, &constants, ok);
    suite.continuity = Some(&continuity);
    write_atomic(&out.join("report.json"), &report::to_json(&suite))?;
    write_atomic(&out.join("continuity.csv"), &report::estimate_csv(&continuity.report))?;
    println!(
        "verify-continuity: {} (spearman = {:.3}; {} flagged paths)",
        if ok { "PASS" } else { "FAIL" },
        continuity.spearman,
        continuity.report.flagged_paths
    );
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn picard(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let constants = report::run_constants(rt)?;
    let study = report::run_picard(rt)?;
    let ok = study.pass;
    let mut suite = SuiteReport::new(&rt.config, &constants, ok);
    suite.picard = Some(&study);
    write_atomic(&out.join("report.json"), &report::to_json(&suite))?;
    write_atomic(&out.join("picard.csv"), &report::picard_csv(&study.first_path_history))?;
    println!(
        "picard: {} ({}/{} converged; max ratio {:.4} vs constant {:.4})",
        if ok { "PASS" } else { "FAIL" },
        study.converged,
        study.n_paths,
        study.max_ratio,
        study.analytic_constant
    );
    // non-convergence is a runtime failure, not a bound violation; the
    // offending paths are already reported individually
    if !study.non_converged_paths.is_empty() {
        return Ok(Outcome::RuntimeFail);
    }
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn all(rt: &Runtime, out: &Path) -> anyhow::Result<Outcome> {
    let full = report::run_all(rt)?;
    write_atomic(&out.join("report.json"), &report::to_json(&full))?;
    write_atomic(&out.join("tail.csv"), &report::estimate_csv(&full.tail))?;
    write_atomic(&out.join("moment.csv"), &report::estimate_csv(&full.moment))?;
    write_atomic(&out.join("continuity.csv"), &report::estimate_csv(&full.continuity.report))?;
    write_atomic(&out.join("picard.csv"), &report::picard_csv(&full.picard.first_path_history))?;
    println!("{}", study_line("verify-tail", &full.tail));
    println!("{}", study_line("verify-moment", &full.moment));
    println!(
        "verify-continuity: {} (spearman = {:.3})",
        if full.continuity.all_pass() { "PASS" } else { "FAIL" },
        full.continuity.spearman
    );
    println!(
        "picard: {} ({}/{} converged; max ratio {:.4} vs constant {:.4})",
        if full.picard.pass { "PASS" } else { "FAIL" },
        full.picard.converged,
        full.picard.n_paths,
        full.picard.max_ratio,
        full.picard.analytic_constant
    );
    println!("all: {}", if full.all_pass { "PASS" } else { "FAIL" });
    if !full.picard.non_converged_paths.is_empty() {
        return Ok(Outcome::RuntimeFail);
    }
    Ok(if full.all_pass { Outcome::Pass } else { Outcome::Fail })
}
