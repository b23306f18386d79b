//! Flat `key = value` run configuration.
//!
//! A config document selects a run mode and supplies physical and numerical
//! parameters, one per line, with `#` comments. Unknown keys, duplicate keys
//! and keys that the selected mode does not use are rejected.
//!
//! ```text
//! mode = fdm
//! u0 = 10
//! a = 0.05
//! M = 7
//! m = 3
//! J = 50
//! dt = 0.1
//! T = 20
//! ```

use crate::control::StopRule;
use crate::fdm::FdmConfig;
use crate::model::PhysicalParams;
use crate::series::SeriesConfig;
use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_TRACE_SAMPLES: usize = 1000;
pub const DEFAULT_ESTIMATE_SWITCHES: usize = 20;

/// What the tool should do with the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Spectral schedule plus a dense trace.
    Analytic,
    /// Finite-difference schedule, trace and profile snapshots.
    Fdm,
    /// Closed-form switch table only.
    Estimate,
    /// Run the spectral and finite-difference models side by side and also
    /// tabulate both closed-form estimates.
    Compare,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Fdm => "fdm",
            Mode::Estimate => "estimate",
            Mode::Compare => "compare",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "fdm" => Ok(Mode::Fdm),
            "estimate" => Ok(Mode::Estimate),
            "compare" => Ok(Mode::Compare),
            other => Err(format!(
                "unknown mode `{other}` (expected analytic, fdm, estimate or compare)"
            )),
        }
    }
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub physical: PhysicalParams,
    pub series: SeriesConfig,
    /// Grid and horizon; present for fdm and compare runs.
    pub fdm: Option<FdmConfig>,
    /// Stopping rule; present for analytic and estimate runs.
    pub stop: Option<StopRule>,
    /// Sample count for the analytic trace.
    pub trace_samples: usize,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("{0}")]
    Validation(String),
}

impl ConfigError {
    /// Parse-class errors (malformed or missing input) versus semantic
    /// validation failures.
    pub fn is_parse(&self) -> bool {
        matches!(self, ConfigError::Parse { .. } | ConfigError::Missing(_))
    }
}

const ALL_KEYS: &[&str] = &[
    "mode",
    "u0",
    "a",
    "M",
    "m",
    "K",
    "crossing_tol",
    "mass_tail_tol",
    "J",
    "dt",
    "T",
    "max_switches",
    "snapshot_stride",
    "trace_samples",
    "out",
    "svg",
];

fn allowed_keys(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Analytic => &[
            "mode",
            "u0",
            "a",
            "M",
            "m",
            "K",
            "crossing_tol",
            "mass_tail_tol",
            "T",
            "max_switches",
            "trace_samples",
            "out",
            "svg",
        ],
        Mode::Fdm => &[
            "mode",
            "u0",
            "a",
            "M",
            "m",
            "J",
            "dt",
            "T",
            "snapshot_stride",
            "out",
            "svg",
        ],
        Mode::Estimate => &[
            "mode",
            "u0",
            "a",
            "M",
            "m",
            "T",
            "max_switches",
            "out",
            "svg",
        ],
        Mode::Compare => &[
            "mode",
            "u0",
            "a",
            "M",
            "m",
            "K",
            "crossing_tol",
            "mass_tail_tol",
            "J",
            "dt",
            "T",
            "out",
            "svg",
        ],
    }
}

struct RawConfig {
    values: HashMap<&'static str, (usize, String)>,
}

impl RawConfig {
    fn lex(text: &str) -> Result<Self, ConfigError> {
        let mut values: HashMap<&'static str, (usize, String)> = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let canonical = ALL_KEYS
                .iter()
                .find(|candidate| **candidate == key)
                .ok_or_else(|| ConfigError::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                })?;
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("key `{key}` has no value"),
                });
            }
            if values
                .insert(canonical, (line_no, value.to_string()))
                .is_some()
            {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { values })
    }

    fn take_raw(&mut self, key: &'static str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>, ConfigError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("invalid value `{value}` for key `{key}`"),
                }),
        }
    }

    fn require<T: FromStr>(&mut self, key: &'static str) -> Result<T, ConfigError> {
        self.take(key)?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }
}

/// Parses and validates a config document, filling defaults
/// (K = 64, crossing_tol = 1e-10, mass_tail_tol = 0.005, out = `.`).
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = RawConfig::lex(text)?;

    let mode: Mode = {
        let (line, value) = raw
            .take_raw("mode")
            .ok_or_else(|| ConfigError::Missing("mode".to_string()))?;
        value
            .parse()
            .map_err(|message| ConfigError::Parse { line, message })?
    };

    // keys the selected mode does not consume are semantic errors
    let allowed = allowed_keys(mode);
    let mut stray: Vec<(usize, &str)> = raw
        .values
        .iter()
        .filter(|(key, _)| !allowed.contains(*key))
        .map(|(key, (line, _))| (*line, *key))
        .collect();
    stray.sort_unstable();
    if let Some((line, key)) = stray.first() {
        return Err(ConfigError::Validation(format!(
            "key `{key}` (line {line}) is not used in {} mode",
            mode.label()
        )));
    }

    let u0: f64 = raw.require("u0")?;
    let diffusivity: f64 = raw.require("a")?;
    let upper: f64 = raw.require("M")?;
    let lower: f64 = raw.require("m")?;
    let physical = PhysicalParams::new(diffusivity, u0, upper, lower)
        .map_err(|err| ConfigError::Validation(err.to_string()))?;

    let mut series = SeriesConfig::default();
    if let Some(num_modes) = raw.take::<usize>("K")? {
        series.num_modes = num_modes;
    }
    if let Some(tol) = raw.take::<f64>("crossing_tol")? {
        series.crossing_tol = tol;
    }
    if let Some(tol) = raw.take::<f64>("mass_tail_tol")? {
        series.mass_tail_tol = tol;
    }
    if matches!(mode, Mode::Analytic | Mode::Compare) {
        series
            .check_tail_budget()
            .map_err(|err| ConfigError::Validation(err.to_string()))?;
    }

    let horizon = raw.take::<f64>("T")?;
    let max_switches = raw.take::<usize>("max_switches")?;
    let stop = match mode {
        Mode::Analytic | Mode::Estimate => match (horizon, max_switches) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Validation(format!(
                    "{} mode takes exactly one of `T` or `max_switches`, not both",
                    mode.label()
                )))
            }
            (Some(t), None) => {
                if !t.is_finite() || t <= 0.0 {
                    return Err(ConfigError::Validation(format!(
                        "horizon T must be positive, got {t}"
                    )));
                }
                Some(StopRule::Horizon(t))
            }
            (None, Some(n)) => Some(StopRule::MaxSwitches(n)),
            (None, None) => match mode {
                Mode::Estimate => Some(StopRule::MaxSwitches(DEFAULT_ESTIMATE_SWITCHES)),
                _ => {
                    return Err(ConfigError::Missing(
                        "T or max_switches (stopping rule)".to_string(),
                    ))
                }
            },
        },
        Mode::Fdm | Mode::Compare => None,
    };

    let fdm = match mode {
        Mode::Fdm | Mode::Compare => {
            let panels: usize = raw.require("J")?;
            let dt: f64 = raw.require("dt")?;
            let t = horizon.ok_or_else(|| ConfigError::Missing("T".to_string()))?;
            let mut cfg = FdmConfig::new(panels, dt, t)
                .map_err(|err| ConfigError::Validation(err.to_string()))?;
            if let Some(stride) = raw.take::<usize>("snapshot_stride")? {
                cfg = cfg
                    .with_snapshot_stride(stride)
                    .map_err(|err| ConfigError::Validation(err.to_string()))?;
            }
            Some(cfg)
        }
        _ => None,
    };

    let trace_samples = raw
        .take::<usize>("trace_samples")?
        .unwrap_or(DEFAULT_TRACE_SAMPLES);
    if trace_samples < 2 {
        return Err(ConfigError::Validation(format!(
            "trace_samples must be at least 2, got {trace_samples}"
        )));
    }

    let output_dir = raw
        .take_raw("out")
        .map(|(_, value)| PathBuf::from(value))
        .unwrap_or_else(|| PathBuf::from("."));
    let emit_svg = match raw.take_raw("svg") {
        None => false,
        Some((line, value)) => match value.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("invalid value `{other}` for key `svg` (true or false)"),
                })
            }
        },
    };

    debug_assert!(raw.values.is_empty(), "unconsumed keys: {:?}", raw.values);

    Ok(RunConfig {
        mode,
        physical,
        series,
        fdm,
        stop,
        trace_samples,
        output_dir,
        emit_svg,
    })
}

/// Serializes a config back into the flat document form. Floats use the
/// shortest round-trip representation, so
/// `parse_config(&render_config(cfg)) == cfg` for every valid config.
pub fn render_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };

    push("mode", cfg.mode.label().to_string());
    push("u0", format!("{:?}", cfg.physical.u0));
    push("a", format!("{:?}", cfg.physical.diffusivity));
    push("M", format!("{:?}", cfg.physical.upper_mass));
    push("m", format!("{:?}", cfg.physical.lower_mass));
    if matches!(cfg.mode, Mode::Analytic | Mode::Compare) {
        push("K", cfg.series.num_modes.to_string());
        push("crossing_tol", format!("{:?}", cfg.series.crossing_tol));
        push("mass_tail_tol", format!("{:?}", cfg.series.mass_tail_tol));
    }
    if let Some(fdm) = &cfg.fdm {
        push("J", fdm.panels.to_string());
        push("dt", format!("{:?}", fdm.dt));
        push("T", format!("{:?}", fdm.horizon));
        if cfg.mode == Mode::Fdm {
            push("snapshot_stride", fdm.snapshot_stride.to_string());
        }
    }
    match cfg.stop {
        Some(StopRule::Horizon(t)) => push("T", format!("{t:?}")),
        Some(StopRule::MaxSwitches(n)) => push("max_switches", n.to_string()),
        None => {}
    }
    if cfg.mode == Mode::Analytic {
        push("trace_samples", cfg.trace_samples.to_string());
    }
    push("out", cfg.output_dir.display().to_string());
    push("svg", cfg.emit_svg.to_string());
    out
}
