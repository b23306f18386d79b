//! Backward-implicit finite differences with threshold-switched boundaries.
//!
//! The rod is discretized into J panels of width `h = 1/J`. One step of
//! `u_t = a u_xx` solves the tridiagonal system
//!
//! ```text
//! -b U_{j-1} + (1 + 2b) U_j - b U_{j+1} = U_j^old,   b = a dt / h^2
//! ```
//!
//! for the interior nodes, with the active phase's boundary value folded
//! into the right-hand side at j = 1 and j = J-1. The scheme is
//! unconditionally stable and obeys a discrete maximum principle for these
//! boundary and initial data.
//!
//! The total mass is the composite trapezoid of the nodal values. Crossing
//! detection is discrete: the switch time is the first grid time whose mass
//! reaches the threshold, so reported times are exact multiples of dt. The
//! flipped boundary value takes effect from the following step; the
//! detecting solve still used the old one.

use crate::control::{Schedule, SwitchEvent};
use crate::estimates::{derive_alpha_beta, higher_order_gaps};
use crate::model::{ParamError, Phase, PhysicalParams, TraceRecord};
use std::fmt;
use thiserror::Error;

/// Grid and horizon for one finite-difference run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdmConfig {
    /// Number of space panels J; nodes are X_j = j/J for j = 0..=J.
    pub panels: usize,
    /// Time step.
    pub dt: f64,
    /// Final time T; the run takes round(T/dt) steps.
    pub horizon: f64,
    /// Steps between profile snapshots within a stage; the first and last
    /// step of every stage are always captured.
    pub snapshot_stride: usize,
}

impl FdmConfig {
    pub fn new(panels: usize, dt: f64, horizon: f64) -> Result<Self, FdmError> {
        let cfg = Self {
            panels,
            dt,
            horizon,
            snapshot_stride: 10,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshot_stride(mut self, stride: usize) -> Result<Self, FdmError> {
        self.snapshot_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), FdmError> {
        if self.panels < 3 {
            return Err(FdmError::TooFewPanels(self.panels));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(FdmError::NonPositiveStep(self.dt));
        }
        if !self.horizon.is_finite() || self.horizon <= self.dt {
            return Err(FdmError::HorizonTooShort {
                dt: self.dt,
                horizon: self.horizon,
            });
        }
        if self.snapshot_stride == 0 {
            return Err(FdmError::ZeroStride);
        }
        Ok(())
    }

    /// Grid spacing `h = 1/J`, also the quadrature step.
    pub fn dx(&self) -> f64 {
        1.0 / self.panels as f64
    }

    /// Scheme coefficient `b = a dt / h^2`.
    pub fn coeff(&self, diffusivity: f64) -> f64 {
        let h = self.dx();
        diffusivity * self.dt / (h * h)
    }

    /// Number of time steps to the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Index of the node nearest x = 1/2.
    pub fn center_node(&self) -> usize {
        (self.panels as f64 * 0.5).round() as usize
    }
}

/// Discrete state: node values, step counter, active phase and the mass of
/// the stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmState {
    pub step: usize,
    pub values: Vec<f64>,
    pub phase: Phase,
    pub mass: f64,
}

impl FdmState {
    /// The t = 0 state: interior at rest, boundary nodes already holding the
    /// charging value (the control is right-continuous at t = 0).
    pub fn initial(cfg: &FdmConfig, params: &PhysicalParams) -> Self {
        let mut values = vec![0.0; cfg.panels + 1];
        values[0] = params.u0;
        values[cfg.panels] = params.u0;
        let mass = trapezoid_mass(&values, cfg.dx());
        Self {
            step: 0,
            values,
            phase: Phase::Charging,
            mass,
        }
    }
}

/// One stored concentration profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSnapshot {
    /// Stage index: the number of switches that happened before this state.
    pub stage: usize,
    pub t: f64,
    pub values: Vec<f64>,
}

/// Non-fatal conditions observed during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdmWarning {
    /// No threshold was crossed before the horizon.
    NoSwitchBeforeHorizon,
    /// dt is coarse relative to the estimated stage duration; switch times
    /// will be heavily quantized.
    CoarseTimeStep { dt: f64, expected_gap: f64 },
}

impl fmt::Display for FdmWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FdmWarning::NoSwitchBeforeHorizon => {
                write!(f, "no switch occurred before the horizon")
            }
            FdmWarning::CoarseTimeStep { dt, expected_gap } => write!(
                f,
                "dt = {dt} exceeds a fifth of the expected stage duration {expected_gap:.4}; \
                 switch times will be coarsely quantized"
            ),
        }
    }
}

/// Everything a finite-difference run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmRun {
    pub schedule: Schedule,
    pub trace: Vec<TraceRecord>,
    pub snapshots: Vec<ProfileSnapshot>,
    pub warnings: Vec<FdmWarning>,
}

impl FdmRun {
    /// Number of constant-phase stages covered by the snapshots.
    pub fn stage_count(&self) -> usize {
        self.snapshots.last().map_or(0, |snap| snap.stage + 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdmError {
    #[error("at least 3 space panels required, got {0}")]
    TooFewPanels(usize),
    #[error("time step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("horizon {horizon} must exceed the time step {dt}")]
    HorizonTooShort { dt: f64, horizon: f64 },
    #[error("snapshot stride must be at least 1")]
    ZeroStride,
    #[error("tridiagonal pivot {index} vanished during elimination")]
    SingularPivot { index: usize },
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Solves a tridiagonal system by forward elimination and back substitution.
///
/// `lower` and `upper` hold the n-1 off-diagonal entries, `diag` and `rhs`
/// the n diagonal and right-hand-side entries. The diffusion matrices used
/// here are strictly diagonally dominant, so the singular-pivot guard is
/// purely defensive.
pub fn thomas_solve(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, FdmError> {
    let n = diag.len();
    assert!(n >= 1, "empty system");
    assert_eq!(lower.len(), n - 1, "lower diagonal length mismatch");
    assert_eq!(upper.len(), n - 1, "upper diagonal length mismatch");
    assert_eq!(rhs.len(), n, "right-hand side length mismatch");

    let mut scratch = vec![0.0; n.saturating_sub(1)];
    let mut solution = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(FdmError::SingularPivot { index: 0 });
    }
    solution[0] = rhs[0] / pivot;
    if n > 1 {
        scratch[0] = upper[0] / pivot;
    }
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * scratch[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(FdmError::SingularPivot { index: i });
        }
        if i < n - 1 {
            scratch[i] = upper[i] / pivot;
        }
        solution[i] = (rhs[i] - lower[i - 1] * solution[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        solution[i] -= scratch[i] * solution[i + 1];
    }
    Ok(solution)
}

/// Composite trapezoid `(h/2) sum_j (U_j + U_{j+1})` over the nodal values;
/// exact for nodal samples of affine functions.
pub fn trapezoid_mass(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 2);
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

/// Advances the state by one backward-implicit step under its current phase
/// and recomputes the mass.
pub fn fdm_step(
    state: &FdmState,
    cfg: &FdmConfig,
    params: &PhysicalParams,
) -> Result<FdmState, FdmError> {
    let j = cfg.panels;
    let b = cfg.coeff(params.diffusivity);
    let boundary = state.phase.boundary_value(params.u0);

    let interior = j - 1;
    let lower = vec![-b; interior - 1];
    let upper = vec![-b; interior - 1];
    let diag = vec![1.0 + 2.0 * b; interior];
    let mut rhs: Vec<f64> = state.values[1..j].to_vec();
    rhs[0] += b * boundary;
    rhs[interior - 1] += b * boundary;

    let solved = thomas_solve(&lower, &diag, &upper, &rhs)?;

    let mut values = Vec::with_capacity(j + 1);
    values.push(boundary);
    values.extend_from_slice(&solved);
    values.push(boundary);
    let mass = trapezoid_mass(&values, cfg.dx());
    Ok(FdmState {
        step: state.step + 1,
        values,
        phase: state.phase,
        mass,
    })
}

/// Runs the relay-controlled scheme to the horizon.
///
/// Starts charging from the rest state and, after each step, switches phase
/// when the trapezoid mass reaches the active threshold (>= M while
/// charging, <= m while discharging). The boundary nodes are clamped to the
/// new value at the switch instant, consistent with right-continuous
/// control; the next solve is the first to feel it. Per-step trace records
/// and per-stage profile snapshots are collected along the way.
pub fn run_fdm_schedule(cfg: &FdmConfig, params: &PhysicalParams) -> Result<FdmRun, FdmError> {
    cfg.validate()?;
    params.validate()?;

    let mut warnings = Vec::new();
    if let Ok(est) = derive_alpha_beta(params) {
        if let Ok((down, up)) = higher_order_gaps(&est, params.diffusivity) {
            let expected_gap = down.min(up);
            if cfg.dt > expected_gap / 5.0 {
                warnings.push(FdmWarning::CoarseTimeStep {
                    dt: cfg.dt,
                    expected_gap,
                });
            }
        }
    }

    let mut state = FdmState::initial(cfg, params);
    let center = cfg.center_node();
    let mut events: Vec<SwitchEvent> = Vec::new();
    let mut trace = Vec::with_capacity(cfg.steps() + 1);
    trace.push(TraceRecord {
        t: 0.0,
        mass: state.mass,
        phase: state.phase,
        center_value: state.values[center],
    });
    let mut snapshots = vec![ProfileSnapshot {
        stage: 0,
        t: 0.0,
        values: state.values.clone(),
    }];
    let mut steps_in_stage = 0usize;

    for _ in 0..cfg.steps() {
        state = fdm_step(&state, cfg, params)?;
        let t = state.step as f64 * cfg.dt;
        debug_assert!(
            state
                .values
                .iter()
                .all(|&v| v >= -1e-9 * params.u0 && v <= params.u0 * (1.0 + 1e-9)),
            "maximum principle violated at step {}",
            state.step
        );

        let mut snapped = false;
        if steps_in_stage.is_multiple_of(cfg.snapshot_stride) {
            snapshots.push(ProfileSnapshot {
                stage: events.len(),
                t,
                values: state.values.clone(),
            });
            snapped = true;
        }

        let crossed = match state.phase {
            Phase::Charging => state.mass >= params.upper_mass,
            Phase::Discharging => state.mass <= params.lower_mass,
        };
        if crossed {
            if !snapped {
                snapshots.push(ProfileSnapshot {
                    stage: events.len(),
                    t,
                    values: state.values.clone(),
                });
            }
            let t_prev = events.last().map_or(0.0, |event| event.t);
            events.push(SwitchEvent {
                n: events.len() + 1,
                t,
                gap: t - t_prev,
                mass_at_switch: state.mass,
                ended_phase: state.phase,
            });
            state.phase = state.phase.toggled();
            let boundary = state.phase.boundary_value(params.u0);
            state.values[0] = boundary;
            state.values[cfg.panels] = boundary;
            steps_in_stage = 0;
        } else {
            steps_in_stage += 1;
        }

        trace.push(TraceRecord {
            t,
            mass: state.mass,
            // at a switch instant the new phase owns the sample
            phase: state.phase,
            center_value: state.values[center],
        });
    }

    if events.is_empty() {
        warnings.push(FdmWarning::NoSwitchBeforeHorizon);
    }

    Ok(FdmRun {
        schedule: Schedule {
            params: *params,
            events,
        },
        trace,
        snapshots,
        warnings,
    })
}
