//! Fixed-time sliding-mode observer for the lumped body-frame disturbance.
//!
//! The observer integrates an estimated body velocity `varpi` next to the
//! plant. The momentum mismatch `Pi = M (nu - varpi)` drives two correction
//! terms; the integral of the second one is the disturbance estimate.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlInput, GliderModel, Vec6, VehicleState};
use crate::sig::{sig, sign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserverGains {
    pub iota1: [f64; 6],
    pub iota2: [f64; 6],
    pub varsigma: [f64; 6],
    /// Assumed bound on the disturbance rate, used only by the gain check.
    pub d_dot_max: [f64; 6],
}

impl Default for ObserverGains {
    fn default() -> Self {
        Self {
            iota1: [0.001, 0.001, 0.01, 0.01, 0.01, 0.01],
            iota2: [0.01, 0.01, 0.1, 0.1, 0.1, 0.1],
            varsigma: [18.0, 18.0, 18.0, 180.0, 180.0, 180.0],
            d_dot_max: default_disturbance_rate_bound(0.2),
        }
    }
}

/// Per-channel disturbance-rate bound: twice the steepest slope of the
/// environmental sinusoids, scaled up by the uncertainty fraction.
pub fn default_disturbance_rate_bound(uncertainty: f64) -> [f64; 6] {
    use std::f64::consts::PI;
    let slopes = [
        0.02 * PI / 100.0,
        0.01 * PI / 100.0,
        0.02 * 2.0 * PI / 300.0,
        0.01 * PI / 100.0,
        0.02 * PI / 100.0,
        0.01 * PI / 100.0,
    ];
    slopes.map(|s| 2.0 * s * (1.0 + uncertainty))
}

/// Integrated observer variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverState {
    /// Estimated body velocity.
    pub varpi: Vec6,
    /// Running integral of the `varphi` correction.
    pub varphi_integral: Vec6,
}

impl ObserverState {
    /// Start from the measured velocity with an empty integral.
    pub fn at_rest(nu: &Vec6) -> Self {
        Self {
            varpi: *nu,
            varphi_integral: Vec6::zeros(),
        }
    }

    /// Lumped-disturbance estimate `-int varphi`.
    pub fn estimate(&self) -> Vec6 {
        -self.varphi_integral
    }
}

/// Velocity-correction term `rho`.
pub fn rho(gains: &ObserverGains, pi: &Vec6) -> Vec6 {
    Vec6::from_fn(|i, _| {
        let x = pi[i];
        -gains.iota1[i] * (sig(0.5, x) + gains.varsigma[i] * sig(1.5, x))
    })
}

/// Integral-correction term `varphi`.
pub fn varphi(gains: &ObserverGains, pi: &Vec6) -> Vec6 {
    Vec6::from_fn(|i, _| {
        let x = pi[i];
        let s = gains.varsigma[i];
        -gains.iota2[i] * (2.0 * s * x + 1.5 * s * s * sig(2.0, x) + 0.5 * sign(x))
    })
}

/// Time derivatives `(varpi_dot, varphi)` of the observer states. All
/// matrices come from the controller-side `model`.
pub fn observer_rates(
    gains: &ObserverGains,
    model: &GliderModel,
    vehicle: &VehicleState,
    input: &ControlInput,
    obs: &ObserverState,
) -> (Vec6, Vec6) {
    let mass = model.mass_diag();
    let pi = mass.component_mul(&(vehicle.nu - obs.varpi));
    let rho = rho(gains, &pi);
    let varphi = varphi(gains, &pi);
    let force = model.generalized_force(vehicle, input) - rho - obs.varphi_integral;
    (force.component_div(&mass), varphi)
}

/// One stand-alone observer step with the vehicle state held over `dt`
/// (classical RK4 in the observer variables). Returns the new state and
/// the disturbance estimate at the end of the step.
pub fn observer_step(
    obs: &ObserverState,
    gains: &ObserverGains,
    model: &GliderModel,
    vehicle: &VehicleState,
    input: &ControlInput,
    dt: f64,
) -> (ObserverState, Vec6) {
    let rates = |o: &ObserverState| observer_rates(gains, model, vehicle, input, o);
    let shift = |o: &ObserverState, k: &(Vec6, Vec6), h: f64| ObserverState {
        varpi: o.varpi + k.0 * h,
        varphi_integral: o.varphi_integral + k.1 * h,
    };
    let k1 = rates(obs);
    let k2 = rates(&shift(obs, &k1, dt / 2.0));
    let k3 = rates(&shift(obs, &k2, dt / 2.0));
    let k4 = rates(&shift(obs, &k3, dt));
    let next = ObserverState {
        varpi: obs.varpi + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (dt / 6.0),
        varphi_integral: obs.varphi_integral + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (dt / 6.0),
    };
    (next, next.estimate())
}

/// Membership of `(iota1, iota2)` in the fixed-time gain set for a channel
/// whose disturbance rate is bounded by `d_dot_max`.
pub fn gain_set_valid(iota1: f64, iota2: f64, d_dot_max: f64) -> bool {
    if !(iota1 > 0.0 && iota2 > 0.0 && d_dot_max > 0.0) {
        return false;
    }
    let knee = 2.0 * d_dot_max.sqrt();
    if iota1 <= knee {
        iota2 > iota1 * iota1 / 4.0 + 4.0 * d_dot_max * d_dot_max / (iota1 * iota1)
    } else {
        iota2 > d_dot_max
    }
}

/// Estimation error `d - d_hat`.
pub fn estimate_error_signal(truth: &Vec6, estimate: &Vec6) -> Vec6 {
    truth - estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn corrections_vanish_at_zero_mismatch() {
        let g = ObserverGains::default();
        assert_eq!(rho(&g, &Vec6::zeros()), Vec6::zeros());
        assert_eq!(varphi(&g, &Vec6::zeros()), Vec6::zeros());
    }

    #[test]
    fn rho_sig_powers() {
        let g = ObserverGains {
            varsigma: [1.0; 6],
            iota1: [0.3; 6],
            ..Default::default()
        };
        let r = rho(&g, &Vec6::repeat(4.0));
        assert_relative_eq!(r[0], -10.0 * 0.3, epsilon = 1e-14);
    }

    #[test]
    fn gain_set_branches() {
        assert!(gain_set_valid(1.0, 5.0, 1.0));
        assert!(!gain_set_valid(1.0, 4.0, 1.0));
        assert!(gain_set_valid(3.0, 1.5, 1.0));
        assert!(gain_set_valid(2.0, 4.26, 1.0));
        // On the knee the first branch applies: threshold 1 + 1 = 2.
        assert!(gain_set_valid(2.0, 2.01, 1.0));
        assert!(!gain_set_valid(2.0, 1.99, 1.0));
        assert!(gain_set_valid(2.0 + 1e-9, 1.01, 1.0));
    }

    #[test]
    fn estimate_starts_at_zero() {
        let obs = ObserverState::at_rest(&Vec6::repeat(0.3));
        assert_eq!(obs.estimate(), Vec6::zeros());
        let d = Vec6::repeat(0.7);
        assert_eq!(estimate_error_signal(&d, &d), Vec6::zeros());
        assert_eq!(estimate_error_signal(&d, &Vec6::zeros()), d);
    }
}
