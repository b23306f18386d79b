//! Two-threshold relay controller for the spectral model.
//!
//! Starting from rest with the boundary charging at u0, the controller
//! watches the total mass, flips to discharging when it reaches the upper
//! threshold M, flips back when it falls to the lower threshold m, and
//! records each switch. Within a phase the mass is strictly monotone, so
//! every crossing is located by geometric bracketing plus bisection on the
//! elapsed time.

use crate::model::{ParamError, Phase, PhysicalParams, TraceRecord};
use crate::series::{
    fresh_modes, mass_eval, mass_weight, mode_advance, profile_eval, ModeState, SeriesConfig,
    SeriesError,
};
use thiserror::Error;

/// Iteration budget shared by bracket growth and bisection in
/// [`find_crossing`].
pub const ITERATION_BUDGET: usize = 200;

/// When to stop generating switch events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Generate every event with t_n <= horizon.
    Horizon(f64),
    /// Generate exactly this many events.
    MaxSwitches(usize),
}

/// One threshold crossing: the n-th switch, its time, the gap to the
/// previous switch, the mass at the crossing and the phase that ended there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    /// 1-based switch index.
    pub n: usize,
    pub t: f64,
    /// `t_n - t_{n-1}` with `t_0 = 0`.
    pub gap: f64,
    pub mass_at_switch: f64,
    pub ended_phase: Phase,
}

/// A generated switching sequence together with the physical parameters it
/// was produced under. Odd events end charging at mass M, even events end
/// discharging at mass m, and times are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub params: PhysicalParams,
    pub events: Vec<SwitchEvent>,
}

impl Schedule {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time of the last switch, or 0 for an empty schedule.
    pub fn last_time(&self) -> f64 {
        self.events.last().map_or(0.0, |event| event.t)
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.events.iter().map(|event| event.gap).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(
        "target mass {target} is outside the reachable range ({lo:.6e}, {hi:.6e}) of the \
         {phase:?} phase"
    )]
    TargetUnreachable {
        phase: Phase,
        target: f64,
        lo: f64,
        hi: f64,
    },
    #[error("crossing search exhausted its iteration budget of {budget}")]
    NonConvergence { budget: usize },
}

/// Mass after evolving `modes` through `dt` of the given phase, without
/// mutating the input.
fn mass_after(modes: &[ModeState], params: &PhysicalParams, phase: Phase, dt: f64) -> f64 {
    let sum: f64 = modes
        .iter()
        .map(|mode| {
            let advanced = mode_advance(*mode, phase, dt);
            crate::series::mass_weight(mode.k) * advanced.psi
        })
        .sum();
    params.u0 * sum
}

/// Elapsed time within the current phase at which the mass first equals
/// `target`.
///
/// The mass is strictly monotone per phase, so the crossing is bracketed by
/// doubling an initial step of `tol` and then bisected until the bracket is
/// narrower than `tol`. Returns `TargetUnreachable` when the target lies
/// outside the phase's reachable range (for charging, `[mass(0), u0 * S_K)`
/// where `S_K` is the truncated weight sum; for discharging,
/// `(0, mass(0)]`), and `NonConvergence` if the iteration budget runs out.
pub fn find_crossing(
    modes: &[ModeState],
    phase: Phase,
    target: f64,
    params: &PhysicalParams,
    tol: f64,
) -> Result<f64, ControlError> {
    assert!(tol > 0.0, "crossing tolerance must be positive, got {tol}");
    let mass_now = mass_eval(modes, params);
    let asymptote = match phase {
        // charging limit of the modes actually present
        Phase::Charging => params.u0 * modes.iter().map(|mode| mass_weight(mode.k)).sum::<f64>(),
        Phase::Discharging => 0.0,
    };
    if target == mass_now {
        return Ok(0.0);
    }
    let reachable = match phase {
        Phase::Charging => target > mass_now && target < asymptote,
        Phase::Discharging => target < mass_now && target > asymptote,
    };
    if !reachable {
        let (lo, hi) = match phase {
            Phase::Charging => (mass_now, asymptote),
            Phase::Discharging => (asymptote, mass_now),
        };
        return Err(ControlError::TargetUnreachable {
            phase,
            target,
            lo,
            hi,
        });
    }

    let crossed = |mass: f64| match phase {
        Phase::Charging => mass >= target,
        Phase::Discharging => mass <= target,
    };

    let mut budget = ITERATION_BUDGET;
    let mut lo = 0.0;
    let mut hi = tol;
    while !crossed(mass_after(modes, params, phase, hi)) {
        budget = budget.checked_sub(1).ok_or(ControlError::NonConvergence {
            budget: ITERATION_BUDGET,
        })?;
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        budget = budget.checked_sub(1).ok_or(ControlError::NonConvergence {
            budget: ITERATION_BUDGET,
        })?;
        let mid = 0.5 * (lo + hi);
        if crossed(mass_after(modes, params, phase, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates the switching sequence for the spectral model.
///
/// Starts charging from rest at t = 0 and alternates phases at each
/// threshold crossing until the stop rule is met. The upper threshold must
/// lie below the truncated charging asymptote `u0 * S_K`, otherwise the
/// first crossing search reports `TargetUnreachable`.
pub fn run_analytic_schedule(
    params: &PhysicalParams,
    series: &SeriesConfig,
    stop: StopRule,
) -> Result<Schedule, ControlError> {
    params.validate()?;
    series.validate()?;

    let mut modes = fresh_modes(series.num_modes, params.diffusivity);
    let mut phase = Phase::Charging;
    let mut t = 0.0;
    let mut events = Vec::new();

    loop {
        match stop {
            StopRule::MaxSwitches(limit) if events.len() >= limit => break,
            _ => {}
        }
        let target = match phase {
            Phase::Charging => params.upper_mass,
            Phase::Discharging => params.lower_mass,
        };
        let gap = find_crossing(&modes, phase, target, params, series.crossing_tol)?;
        if let StopRule::Horizon(horizon) = stop {
            if t + gap > horizon {
                break;
            }
        }
        for mode in &mut modes {
            *mode = mode_advance(*mode, phase, gap);
        }
        t += gap;
        events.push(SwitchEvent {
            n: events.len() + 1,
            t,
            gap,
            mass_at_switch: mass_eval(&modes, params),
            ended_phase: phase,
        });
        phase = phase.toggled();
    }

    Ok(Schedule {
        params: *params,
        events,
    })
}

/// Samples mass, phase and the midpoint concentration of the spectral model
/// on a uniform grid of `samples` points over `[0, t_end]`, replaying the
/// schedule's phases. At a switch instant the new phase owns the sample.
pub fn sample_spectral_trace(
    params: &PhysicalParams,
    series: &SeriesConfig,
    schedule: &Schedule,
    t_end: f64,
    samples: usize,
) -> Vec<TraceRecord> {
    assert!(samples >= 2, "need at least two samples");
    assert!(t_end > 0.0, "t_end must be positive");

    let mut records = Vec::with_capacity(samples);
    // state at the start of the phase containing the sample
    let mut base_modes = fresh_modes(series.num_modes, params.diffusivity);
    let mut base_t = 0.0;
    let mut phase = Phase::Charging;
    let mut next_event = 0;

    let step = t_end / (samples - 1) as f64;
    for i in 0..samples {
        let t = i as f64 * step;
        while next_event < schedule.events.len() && schedule.events[next_event].t <= t {
            let event = &schedule.events[next_event];
            for mode in &mut base_modes {
                *mode = mode_advance(*mode, phase, event.t - base_t);
            }
            base_t = event.t;
            phase = phase.toggled();
            next_event += 1;
        }
        let mut modes = base_modes.clone();
        for mode in &mut modes {
            *mode = mode_advance(*mode, phase, t - base_t);
        }
        records.push(TraceRecord {
            t,
            mass: mass_eval(&modes, params),
            phase,
            center_value: profile_eval(&modes, params, 0.5),
        });
    }
    records
}
