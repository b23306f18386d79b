//! Truncated odd-mode series for the relay-controlled heat equation.
//!
//! The solution with piecewise-constant boundary value `phi(t)` in {u0, 0}
//! expands over odd sine modes `sin((2k+1) pi x)`. Each mode carries a
//! normalized response `psi_k in [0,1]` obeying
//!
//! ```text
//! psi' = -lambda_k^2 psi + lambda_k^2 phi(t)/u0,   lambda_k^2 = a ((2k+1) pi)^2
//! ```
//!
//! which is advanced *exactly* per constant-phase interval by
//! [`mode_advance`]. The total mass is the weighted sum
//! `u0 * sum_k 8/((2k+1)^2 pi^2) * psi_k` and the profile the corresponding
//! sine series. Exponentials only ever appear with negative arguments, so the
//! evolution is stable at arbitrary times and mode counts; naive unrolled
//! forms that mix `exp(+lambda^2 t_j)` factors overflow long before the
//! parameter ranges of interest.
//!
//! The profile series converges to the boundary value only in the open
//! interval: at x = 0 and x = 1 every sine term vanishes, and Gibbs
//! oscillations appear near the ends right after a switch. They are a
//! property of the representation and are left visible.

use crate::model::{Phase, PhysicalParams};
use std::f64::consts::PI;
use thiserror::Error;

/// Truncation and tolerance knobs for the spectral layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Number of odd modes kept (wavenumbers 2k+1 for k = 0..K-1).
    pub num_modes: usize,
    /// Bisection width, in time units, at which a threshold crossing is
    /// accepted.
    pub crossing_tol: f64,
    /// Budget for the mass truncation tail, as a fraction of u0. Checked
    /// against [`mass_tail_fraction`] when a run is configured; library
    /// callers that deliberately truncate hard (e.g. a single-mode run)
    /// bypass the check.
    pub mass_tail_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            num_modes: 64,
            crossing_tol: 1e-10,
            mass_tail_tol: 5e-3,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<(), SeriesError> {
        if self.num_modes == 0 {
            return Err(SeriesError::ZeroModes);
        }
        if !self.crossing_tol.is_finite() || self.crossing_tol <= 0.0 {
            return Err(SeriesError::NonPositiveTolerance {
                name: "crossing_tol",
                value: self.crossing_tol,
            });
        }
        if !self.mass_tail_tol.is_finite() || self.mass_tail_tol <= 0.0 {
            return Err(SeriesError::NonPositiveTolerance {
                name: "mass_tail_tol",
                value: self.mass_tail_tol,
            });
        }
        Ok(())
    }

    /// Rejects the configuration if the rigorous truncation tail exceeds
    /// `mass_tail_tol`.
    pub fn check_tail_budget(&self) -> Result<(), SeriesError> {
        self.validate()?;
        let tail = mass_tail_fraction(self.num_modes);
        if tail > self.mass_tail_tol {
            return Err(SeriesError::TailBudgetExceeded {
                num_modes: self.num_modes,
                tail,
                budget: self.mass_tail_tol,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("num_modes must be at least 1")]
    ZeroModes,
    #[error("{name} must be positive, got {value}")]
    NonPositiveTolerance { name: &'static str, value: f64 },
    #[error(
        "mass truncation tail {tail:.3e} for K = {num_modes} exceeds mass_tail_tol = {budget:.3e}; \
         raise K or the budget"
    )]
    TailBudgetExceeded {
        num_modes: usize,
        tail: f64,
        budget: f64,
    },
    #[error("theta series requires t > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("theta series requires at least one term")]
    ZeroTerms,
}

/// One odd Fourier mode of the solution.
///
/// `psi` is the mode's normalized response, 0 at rest and approaching 1
/// under sustained charging; `lambda_sq = a ((2k+1) pi)^2` is its decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub k: usize,
    pub lambda_sq: f64,
    pub psi: f64,
}

impl ModeState {
    /// A mode at rest (`psi = 0`) for wavenumber 2k+1.
    pub fn new(k: usize, diffusivity: f64) -> Self {
        let odd = (2 * k + 1) as f64;
        Self {
            k,
            lambda_sq: diffusivity * (odd * PI) * (odd * PI),
            psi: 0.0,
        }
    }
}

/// Modes 0..num_modes at rest, the state at t = 0.
pub fn fresh_modes(num_modes: usize, diffusivity: f64) -> Vec<ModeState> {
    (0..num_modes)
        .map(|k| ModeState::new(k, diffusivity))
        .collect()
}

/// Mass weight of mode k: `8 / ((2k+1)^2 pi^2)`. The weights sum to 1 over
/// all k, so the truncated charging asymptote is `u0 * sum_{k<K} w_k`.
pub fn mass_weight(k: usize) -> f64 {
    let odd = (2 * k + 1) as f64;
    8.0 / (odd * odd * PI * PI)
}

/// Fraction of the steady mass lost to truncation at K modes:
/// `(8/pi^2) * sum_{k>=K} (2k+1)^-2 = 1 - sum_{k<K} w_k`.
pub fn mass_tail_fraction(num_modes: usize) -> f64 {
    let partial: f64 = (0..num_modes).map(mass_weight).sum();
    (1.0 - partial).max(0.0)
}

/// Largest mass reachable by charging with K modes: `u0 * sum_{k<K} w_k`.
pub fn truncated_mass_limit(num_modes: usize, u0: f64) -> f64 {
    let partial: f64 = (0..num_modes).map(mass_weight).sum();
    u0 * partial
}

/// Advances one mode across a constant-phase interval of length `dt`.
///
/// Charging relaxes `psi` toward 1, discharging decays it toward 0:
///
/// ```text
/// charging:     psi <- 1 + (psi - 1) exp(-lambda^2 dt)
/// discharging:  psi <- psi * exp(-lambda^2 dt)
/// ```
///
/// Both are the exact solution of the mode equation for that phase, so a
/// schedule is evolved without time-stepping error and without any positive
/// exponential.
pub fn mode_advance(state: ModeState, phase: Phase, dt: f64) -> ModeState {
    debug_assert!(dt >= 0.0, "mode_advance requires dt >= 0, got {dt}");
    let decay = (-state.lambda_sq * dt).exp();
    let psi = match phase {
        Phase::Charging => 1.0 + (state.psi - 1.0) * decay,
        Phase::Discharging => state.psi * decay,
    };
    ModeState { psi, ..state }
}

/// Total mass `u0 * sum_k w_k psi_k` of the truncated series.
pub fn mass_eval(modes: &[ModeState], params: &PhysicalParams) -> f64 {
    let sum: f64 = modes
        .iter()
        .map(|mode| mass_weight(mode.k) * mode.psi)
        .sum();
    params.u0 * sum
}

/// Instantaneous mass rate `d mu / dt` under the given phase.
///
/// Follows from the mode equation: each mode contributes
/// `w_k lambda_k^2 (1 - psi_k)` while charging and `-w_k lambda_k^2 psi_k`
/// while discharging, scaled by u0.
pub fn mass_slope(modes: &[ModeState], params: &PhysicalParams, phase: Phase) -> f64 {
    let sum: f64 = modes
        .iter()
        .map(|mode| {
            let w = mass_weight(mode.k);
            match phase {
                Phase::Charging => w * mode.lambda_sq * (1.0 - mode.psi),
                Phase::Discharging => -w * mode.lambda_sq * mode.psi,
            }
        })
        .sum();
    params.u0 * sum
}

/// Concentration at `x` from the truncated sine series
/// `u0 * sum_k 4/((2k+1) pi) * psi_k * sin((2k+1) pi x)`.
///
/// The exact integral of this series over [0,1] reproduces [`mass_eval`]
/// over the same modes. At x = 0 and x = 1 the value is identically 0.
pub fn profile_eval(modes: &[ModeState], params: &PhysicalParams, x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "profile_eval requires x in [0,1], got {x}"
    );
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    let sum: f64 = modes
        .iter()
        .map(|mode| {
            let odd = (2 * mode.k + 1) as f64;
            4.0 / (odd * PI) * mode.psi * (odd * PI * x).sin()
        })
        .sum();
    params.u0 * sum
}

/// Periodic heat-kernel series `1/2 + sum_{n=1}^{N} exp(-n^2 pi^2 t) cos(n pi x)`.
///
/// Kept for reference and testing; the mass/profile pipeline does not call
/// it. Truncation error is bounded by [`theta_tail_bound`].
pub fn theta_eval(x: f64, t: f64, num_terms: usize) -> Result<f64, SeriesError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(SeriesError::NonPositiveTime(t));
    }
    if num_terms == 0 {
        return Err(SeriesError::ZeroTerms);
    }
    let mut sum = 0.5;
    for n in 1..=num_terms {
        let nf = n as f64;
        sum += (-nf * nf * PI * PI * t).exp() * (nf * PI * x).cos();
    }
    Ok(sum)
}

/// Geometric bound on the absolute truncation error of [`theta_eval`]:
/// `exp(-(N+1)^2 pi^2 t) / (1 - exp(-(2N+3) pi^2 t))`.
pub fn theta_tail_bound(t: f64, num_terms: usize) -> f64 {
    assert!(t > 0.0 && num_terms >= 1);
    let next = (num_terms + 1) as f64;
    let head = (-next * next * PI * PI * t).exp();
    let ratio = (-(2.0 * num_terms as f64 + 3.0) * PI * PI * t).exp();
    head / (1.0 - ratio)
}
