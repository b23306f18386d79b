//! Bang-bang boundary control of the 1D heat equation, driven by total mass.
//!
//! A rod on (0,1) starts empty. Both ends are held at a concentration `u0`
//! until the total mass `mu(t) = integral of u over (0,1)` reaches an upper
//! threshold M, then at 0 until the mass falls back to a lower threshold m,
//! and so on. The switching instants t_1 < t_2 < ... are the object of
//! interest. This crate computes them three independent ways and
//! cross-checks the results:
//!
//! * [`control::run_analytic_schedule`] evolves a truncated odd-mode
//!   spectral model exactly per phase and locates each threshold crossing
//!   by bisection;
//! * [`estimates`] gives closed-form switch times and gaps from the slowest
//!   mode alone;
//! * [`fdm::run_fdm_schedule`] reruns the experiment with backward-implicit
//!   finite differences and trapezoid quadrature, flipping the boundary on
//!   discrete threshold crossings.
//!
//! [`config`] and [`report`] supply the file formats used by the `masstat`
//! binary: a flat `key = value` run configuration and CSV/SVG outputs.

pub mod config;
pub mod control;
pub mod estimates;
pub mod fdm;
pub mod model;
pub mod report;
pub mod series;

pub use config::{parse_config, render_config, Mode, RunConfig};
pub use control::{
    find_crossing, run_analytic_schedule, sample_spectral_trace, Schedule, StopRule, SwitchEvent,
};
pub use estimates::{
    derive_alpha_beta, estimate_schedule, first_term_gap, first_term_switch_time,
    higher_order_gaps, higher_order_switch_value, EstimateParams,
};
pub use fdm::{
    fdm_step, run_fdm_schedule, thomas_solve, trapezoid_mass, FdmConfig, FdmRun, FdmState,
    ProfileSnapshot,
};
pub use model::{ParamError, Phase, PhysicalParams, TraceRecord};
pub use series::{
    fresh_modes, mass_eval, mode_advance, profile_eval, theta_eval, ModeState, SeriesConfig,
};
