//! Closed-form switch-time and gap estimates from the slowest mode.
//!
//! Keeping only the `sin(pi x)` mode of the mass series turns the threshold
//! conditions into explicit algebra. Two parametrizations are used:
//!
//! * symmetric: `M = (8/pi^2)(1 - alpha) u0`, `m = (8/pi^2) alpha u0`
//!   with `0 < alpha < 1/2`, giving a constant gap
//!   `ln((1-alpha)/alpha) / (a pi^2)`;
//! * asymmetric: `M = (1 - (8/pi^2) alpha) u0`, `m = (8/pi^2) beta u0`,
//!   giving the alternation
//!   `down = ln((1-alpha)/beta) / (a pi^2)`,
//!   `up = ln((1-beta)/alpha) / (a pi^2)`.
//!
//! The asymmetric switch values are
//!
//! ```text
//! exp(-lambda_1^2 t_{2n})   = alpha^n beta^n / ((1-alpha)^n (1-beta)^(n-1))
//! exp(-lambda_1^2 t_{2n+1}) = alpha^(n+1) beta^n / ((1-alpha)^n (1-beta)^n)
//! ```
//!
//! with `exp(-lambda_1^2 t_1) = alpha`. Taking logs of consecutive ratios
//! recovers the gaps above, which fixes the `1/(a pi^2)` prefactor the gap
//! formulas must carry to be dimensionally consistent. For `alpha = beta`
//! everything reduces to the symmetric case. Diffusivity enters purely as a
//! time rescaling and u0 purely as a mass scale.

use crate::control::{Schedule, SwitchEvent};
use crate::model::{ParamError, Phase, PhysicalParams};
use std::f64::consts::PI;
use thiserror::Error;

/// Normalized threshold positions used by the closed forms.
///
/// `alpha` measures how far the upper threshold sits below the charging
/// asymptote, `beta` how far the lower threshold sits above zero, both in
/// units of the slowest mode's mass weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    pub alpha: f64,
    pub beta: f64,
}

impl EstimateParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, EstimateError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(EstimateError::OutOfRange {
                name: "alpha",
                value: alpha,
            });
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(EstimateError::OutOfRange {
                name: "beta",
                value: beta,
            });
        }
        Ok(Self { alpha, beta })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("{name} = {value} falls outside (0, 1); thresholds too close to 0 or u0 for a first-mode estimate")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("alpha = {0} outside (0, 1/2); the symmetric estimate needs m < M")]
    AlphaRange(f64),
    #[error(
        "estimated gap would be non-positive (alpha = {alpha}, beta = {beta}); \
         the corridor is too narrow for a first-mode estimate"
    )]
    NegativeGap { alpha: f64, beta: f64 },
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Maps physical thresholds to the normalized `(alpha, beta)` pair:
/// `alpha = (1 - M/u0) pi^2 / 8`, `beta = (m/u0) pi^2 / 8`.
pub fn derive_alpha_beta(params: &PhysicalParams) -> Result<EstimateParams, EstimateError> {
    params.validate()?;
    let alpha = (1.0 - params.upper_mass / params.u0) * PI * PI / 8.0;
    let beta = params.lower_mass / params.u0 * PI * PI / 8.0;
    EstimateParams::new(alpha, beta)
}

/// Symmetric-threshold switch time `t_n = ln((1-alpha)^(n-1) / alpha^n) / (a pi^2)`.
pub fn first_term_switch_time(
    n: usize,
    alpha: f64,
    diffusivity: f64,
) -> Result<f64, EstimateError> {
    assert!(n >= 1, "switch index starts at 1");
    assert!(diffusivity > 0.0);
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(EstimateError::AlphaRange(alpha));
    }
    let log_value = (n as f64 - 1.0) * (1.0 - alpha).ln() - n as f64 * alpha.ln();
    Ok(log_value / (diffusivity * PI * PI))
}

/// Symmetric-threshold gap `ln((1-alpha)/alpha) / (a pi^2)`, independent of n.
pub fn first_term_gap(alpha: f64, diffusivity: f64) -> Result<f64, EstimateError> {
    assert!(diffusivity > 0.0);
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(EstimateError::AlphaRange(alpha));
    }
    Ok(((1.0 - alpha) / alpha).ln() / (diffusivity * PI * PI))
}

/// Asymmetric-threshold switch value `exp(-lambda_1^2 t_n)` (dimensionless;
/// diffusivity cancels out of the value itself).
pub fn higher_order_switch_value(n: usize, est: &EstimateParams) -> f64 {
    assert!(n >= 1, "switch index starts at 1");
    let (alpha, beta) = (est.alpha, est.beta);
    if n.is_multiple_of(2) {
        // even switch 2j ends a discharge at the lower threshold
        let j = (n / 2) as i32;
        alpha.powi(j) * beta.powi(j) / ((1.0 - alpha).powi(j) * (1.0 - beta).powi(j - 1))
    } else {
        // odd switch 2j+1 ends a charge at the upper threshold
        let j = ((n - 1) / 2) as i32;
        alpha.powi(j + 1) * beta.powi(j) / ((1.0 - alpha).powi(j) * (1.0 - beta).powi(j))
    }
}

/// Asymmetric-threshold switch time `-ln(value) / (a pi^2)`.
pub fn higher_order_switch_time(n: usize, est: &EstimateParams, diffusivity: f64) -> f64 {
    assert!(diffusivity > 0.0);
    -higher_order_switch_value(n, est).ln() / (diffusivity * PI * PI)
}

/// Asymmetric-threshold gaps `(down, up)`:
/// `down = ln((1-alpha)/beta) / (a pi^2)` for discharge stages,
/// `up = ln((1-beta)/alpha) / (a pi^2)` for charge stages.
///
/// Errors with `NegativeGap` when either log argument is <= 1, which happens
/// when `alpha + beta >= 1` and the first-mode picture breaks down.
pub fn higher_order_gaps(
    est: &EstimateParams,
    diffusivity: f64,
) -> Result<(f64, f64), EstimateError> {
    assert!(diffusivity > 0.0);
    let down_arg = (1.0 - est.alpha) / est.beta;
    let up_arg = (1.0 - est.beta) / est.alpha;
    if down_arg <= 1.0 || up_arg <= 1.0 {
        return Err(EstimateError::NegativeGap {
            alpha: est.alpha,
            beta: est.beta,
        });
    }
    let scale = diffusivity * PI * PI;
    Ok((down_arg.ln() / scale, up_arg.ln() / scale))
}

/// Builds a schedule whose times come from the asymmetric closed forms, so
/// it can be emitted and compared like a simulated one. Odd events carry the
/// upper threshold as their mass, even events the lower.
pub fn estimate_schedule(
    params: &PhysicalParams,
    stop: crate::control::StopRule,
) -> Result<Schedule, EstimateError> {
    use crate::control::StopRule;

    let est = derive_alpha_beta(params)?;
    // surfaces NegativeGap early for corridors the estimate cannot order
    higher_order_gaps(&est, params.diffusivity)?;
    let mut events = Vec::new();
    let mut t_prev = 0.0;
    for n in 1.. {
        match stop {
            StopRule::MaxSwitches(limit) if n > limit => break,
            _ => {}
        }
        let t = higher_order_switch_time(n, &est, params.diffusivity);
        if let StopRule::Horizon(horizon) = stop {
            if t > horizon {
                break;
            }
        }
        let ended_phase = if n % 2 == 1 {
            Phase::Charging
        } else {
            Phase::Discharging
        };
        events.push(SwitchEvent {
            n,
            t,
            gap: t - t_prev,
            mass_at_switch: match ended_phase {
                Phase::Charging => params.upper_mass,
                Phase::Discharging => params.lower_mass,
            },
            ended_phase,
        });
        t_prev = t;
    }
    Ok(Schedule {
        params: *params,
        events,
    })
}
