//! Shared domain types: physical parameters, controller phase, trace records.

use thiserror::Error;

/// Which boundary value the two-threshold relay currently applies.
///
/// `Charging` holds both ends of the rod at `u0` so the total mass rises;
/// `Discharging` holds them at `0` so it falls. The boundary control is
/// right-continuous: at a switch instant the new phase owns the boundary
/// value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Charging,
    Discharging,
}

impl Phase {
    /// Boundary value applied at both ends while this phase is active.
    pub fn boundary_value(self, u0: f64) -> f64 {
        match self {
            Phase::Charging => u0,
            Phase::Discharging => 0.0,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Phase::Charging => Phase::Discharging,
            Phase::Discharging => Phase::Charging,
        }
    }

    /// Lowercase label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Phase::Charging => "charging",
            Phase::Discharging => "discharging",
        }
    }
}

/// Problem data for `u_t = a u_xx` on (0,1) with relay-controlled
/// boundary values and mass corridor `[lower_mass, upper_mass]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Diffusivity `a` (length^2 / time).
    pub diffusivity: f64,
    /// Boundary concentration applied while charging.
    pub u0: f64,
    /// Upper mass threshold `M`; charging ends when the mass reaches it.
    pub upper_mass: f64,
    /// Lower mass threshold `m`; discharging ends when the mass falls to it.
    pub lower_mass: f64,
}

impl PhysicalParams {
    pub fn new(
        diffusivity: f64,
        u0: f64,
        upper_mass: f64,
        lower_mass: f64,
    ) -> Result<Self, ParamError> {
        let params = Self {
            diffusivity,
            u0,
            upper_mass,
            lower_mass,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks `diffusivity > 0` and the threshold ordering `0 < m < M < u0`.
    pub fn validate(&self) -> Result<(), ParamError> {
        if !self.diffusivity.is_finite() || self.diffusivity <= 0.0 {
            return Err(ParamError::NonPositiveDiffusivity(self.diffusivity));
        }
        let ordered = self.lower_mass > 0.0
            && self.lower_mass < self.upper_mass
            && self.upper_mass < self.u0
            && self.u0.is_finite();
        if !ordered {
            return Err(ParamError::BoundsOrdering {
                u0: self.u0,
                upper_mass: self.upper_mass,
                lower_mass: self.lower_mass,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("diffusivity must be positive and finite, got {0}")]
    NonPositiveDiffusivity(f64),
    #[error("0 < m < M < u0 required, got m = {lower_mass}, M = {upper_mass}, u0 = {u0}")]
    BoundsOrdering {
        u0: f64,
        upper_mass: f64,
        lower_mass: f64,
    },
}

/// One sample of a run: time, total mass, active phase and the value of the
/// solution at the node nearest x = 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub mass: f64,
    pub phase: Phase,
    pub center_value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_ordered_bounds() {
        let p = PhysicalParams::new(0.05, 10.0, 7.0, 3.0).unwrap();
        assert_eq!(p.upper_mass, 7.0);
        assert_eq!(Phase::Charging.boundary_value(p.u0), 10.0);
        assert_eq!(Phase::Discharging.boundary_value(p.u0), 0.0);
    }

    #[test]
    fn rejects_degenerate_bounds() {
        // m = M collapses the corridor
        assert!(PhysicalParams::new(1.0, 1.0, 0.5, 0.5).is_err());
        // m > M
        assert!(PhysicalParams::new(1.0, 1.0, 0.4, 0.5).is_err());
        // M >= u0
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 0.5).is_err());
        // m <= 0
        assert!(PhysicalParams::new(1.0, 1.0, 0.5, 0.0).is_err());
        // bad diffusivity
        assert!(PhysicalParams::new(0.0, 1.0, 0.5, 0.2).is_err());
        assert!(PhysicalParams::new(-1.0, 1.0, 0.5, 0.2).is_err());
    }

    #[test]
    fn phase_toggle_alternates() {
        assert_eq!(Phase::Charging.toggled(), Phase::Discharging);
        assert_eq!(Phase::Discharging.toggled(), Phase::Charging);
    }

    #[test]
    fn core_values_cross_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Phase>();
        assert_send_sync::<PhysicalParams>();
        assert_send_sync::<TraceRecord>();
        assert_send_sync::<crate::series::ModeState>();
        assert_send_sync::<crate::control::Schedule>();
        assert_send_sync::<crate::fdm::FdmRun>();
    }
}
