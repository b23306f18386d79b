//! Command-line front end: `masstat <mode> --config <path> [--out <dir>] [--svg]`.
//!
//! Exit codes: 0 on success, 1 on configuration or validation errors, 2 on
//! runtime errors (non-convergence, I/O).

use clap::Parser;
use masstat::config::{self, Mode, RunConfig};
use masstat::control::{self, ControlError, StopRule};
use masstat::estimates::{self, EstimateError};
use masstat::fdm::{self, FdmError};
use masstat::report;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "masstat",
    about = "Simulates thermostat-style boundary control of the 1D heat equation, \
             switching on total-mass thresholds",
    version
)]
struct Cli {
    /// Run mode: analytic, fdm, estimate or compare. Must match the config.
    mode: Mode,
    /// Path to the flat `key = value` run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render trace.svg; overrides the config's `svg` key.
    #[arg(long)]
    svg: bool,
}

enum AppError {
    /// Bad configuration or parameters.
    Validation(String),
    /// Failure while running or writing.
    Runtime(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Validation(msg) | AppError::Runtime(msg) => msg,
        }
    }
}

impl From<config::ConfigError> for AppError {
    fn from(err: config::ConfigError) -> Self {
        AppError::Validation(err.to_string())
    }
}

impl From<ControlError> for AppError {
    fn from(err: ControlError) -> Self {
        match err {
            ControlError::NonConvergence { .. } => AppError::Runtime(err.to_string()),
            _ => AppError::Validation(err.to_string()),
        }
    }
}

impl From<EstimateError> for AppError {
    fn from(err: EstimateError) -> Self {
        AppError::Validation(err.to_string())
    }
}

impl From<FdmError> for AppError {
    fn from(err: FdmError) -> Self {
        match err {
            FdmError::SingularPivot { .. } => AppError::Runtime(err.to_string()),
            _ => AppError::Validation(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|err| AppError::Runtime(format!("reading {}: {err}", cli.config.display())))?;
    let mut cfg = config::parse_config(&text)?;
    if cfg.mode != cli.mode {
        return Err(AppError::Validation(format!(
            "config selects mode `{}` but the command line asked for `{}`",
            cfg.mode.label(),
            cli.mode.label()
        )));
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.svg {
        cfg.emit_svg = true;
    }
    fs::create_dir_all(&cfg.output_dir).map_err(|err| {
        AppError::Runtime(format!("creating {}: {err}", cfg.output_dir.display()))
    })?;

    match cfg.mode {
        Mode::Analytic => run_analytic(&cfg),
        Mode::Fdm => run_fdm(&cfg),
        Mode::Estimate => run_estimate(&cfg),
        Mode::Compare => run_compare(&cfg),
    }
}

fn write_file(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut Vec<u8>) -> Result<(), AppError>,
) -> Result<(), AppError> {
    let path = dir.join(name);
    let mut buffer = Vec::new();
    write(&mut buffer)?;
    fs::write(&path, &buffer)
        .map_err(|err| AppError::Runtime(format!("writing {}: {err}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn io_err(name: &str, err: std::io::Error) -> AppError {
    AppError::Runtime(format!("composing {name}: {err}"))
}

fn run_analytic(cfg: &RunConfig) -> Result<(), AppError> {
    let stop = cfg.stop.expect("analytic config carries a stop rule");
    let schedule = control::run_analytic_schedule(&cfg.physical, &cfg.series, stop)?;
    println!(
        "spectral truncation: K = {}, mass tail bound {:.3e} (budget {:.3e})",
        cfg.series.num_modes,
        masstat::series::mass_tail_fraction(cfg.series.num_modes),
        cfg.series.mass_tail_tol
    );
    println!(
        "analytic schedule: {} switches, last at t = {:.6}",
        schedule.events.len(),
        schedule.last_time()
    );
    write_file(&cfg.output_dir, "switches.csv", |sink| {
        report::emit_switch_table(&schedule, sink).map_err(|e| io_err("switches.csv", e))
    })?;

    let t_end = match stop {
        StopRule::Horizon(t) => t,
        StopRule::MaxSwitches(_) => schedule.last_time(),
    };
    if t_end > 0.0 {
        let trace = control::sample_spectral_trace(
            &cfg.physical,
            &cfg.series,
            &schedule,
            t_end,
            cfg.trace_samples,
        );
        write_file(&cfg.output_dir, "trace.csv", |sink| {
            report::emit_trace(&trace, sink).map_err(|e| io_err("trace.csv", e))
        })?;
        if cfg.emit_svg {
            write_file(&cfg.output_dir, "trace.svg", |sink| {
                report::render_trace_svg(&trace, sink).map_err(|e| io_err("trace.svg", e))
            })?;
        }
    }
    Ok(())
}

fn run_fdm(cfg: &RunConfig) -> Result<(), AppError> {
    let grid = cfg.fdm.as_ref().expect("fdm config carries a grid");
    let run = fdm::run_fdm_schedule(grid, &cfg.physical)?;
    for warning in &run.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "fdm schedule: {} switches over {} steps",
        run.schedule.events.len(),
        grid.steps()
    );
    write_file(&cfg.output_dir, "switches.csv", |sink| {
        report::emit_switch_table(&run.schedule, sink).map_err(|e| io_err("switches.csv", e))
    })?;
    write_file(&cfg.output_dir, "trace.csv", |sink| {
        report::emit_trace(&run.trace, sink).map_err(|e| io_err("trace.csv", e))
    })?;
    write_file(&cfg.output_dir, "profiles.csv", |sink| {
        report::emit_profiles(&run.snapshots, sink).map_err(|e| io_err("profiles.csv", e))
    })?;
    if cfg.emit_svg {
        write_file(&cfg.output_dir, "trace.svg", |sink| {
            report::render_trace_svg(&run.trace, sink).map_err(|e| io_err("trace.svg", e))
        })?;
    }
    Ok(())
}

fn run_estimate(cfg: &RunConfig) -> Result<(), AppError> {
    let stop = cfg.stop.expect("estimate config carries a stop rule");
    let schedule = estimates::estimate_schedule(&cfg.physical, stop)?;
    let est = estimates::derive_alpha_beta(&cfg.physical)?;
    let (down, up) = estimates::higher_order_gaps(&est, cfg.physical.diffusivity)?;
    println!(
        "estimate: alpha = {:.6}, beta = {:.6}, gaps down = {:.6}, up = {:.6}",
        est.alpha, est.beta, down, up
    );
    write_file(&cfg.output_dir, "switches.csv", |sink| {
        report::emit_switch_table(&schedule, sink).map_err(|e| io_err("switches.csv", e))
    })
}

fn run_compare(cfg: &RunConfig) -> Result<(), AppError> {
    let grid = cfg.fdm.as_ref().expect("compare config carries a grid");
    let fdm_run = fdm::run_fdm_schedule(grid, &cfg.physical)?;
    for warning in &fdm_run.warnings {
        eprintln!("warning: {warning}");
    }
    let analytic = control::run_analytic_schedule(
        &cfg.physical,
        &cfg.series,
        StopRule::Horizon(grid.horizon),
    )?;
    let est = estimates::derive_alpha_beta(&cfg.physical)?;
    println!(
        "compare: fdm {} switches, analytic {} switches",
        fdm_run.schedule.events.len(),
        analytic.events.len()
    );
    write_file(&cfg.output_dir, "compare.csv", |sink| {
        report::compare_report(&analytic, &fdm_run.schedule, &est, sink).map_err(|err| match err {
            report::ReportError::Io(e) => io_err("compare.csv", e),
            other => AppError::Validation(other.to_string()),
        })
    })
}
