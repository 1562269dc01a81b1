//! Disturbance observer on a frozen vehicle state.

use glider_core::dynamics::{ControlInput, Vec6, VehicleState};
use glider_core::observer::{estimate_error_signal, gain_set_valid, observer_step, ObserverGains, ObserverState};

mod common;

/// With the vehicle held still, the only consistent lumped disturbance is
/// the one cancelling the modeled force, `d = -F_mod`.
#[test]
fn estimate_converges_on_a_held_state() {
    let (_, model) = common::uncertain_model();
    let state = VehicleState::new(
        Vec6::new(0.0, 0.0, 10.0, 0.1, -0.3, 0.5),
        Vec6::new(0.4, 0.01, 0.05, 0.0, 0.01, 0.0),
    );
    let input = ControlInput::new(0.1, 0.01, 0.2);
    let expected = -model.generalized_force(&state, &input);
    let rate_bound = 1.0;
    let gains = ObserverGains {
        iota1: [1.0; 6],
        iota2: [5.0; 6],
        varsigma: [1.0; 6],
        d_dot_max: [rate_bound; 6],
    };
    assert!(gain_set_valid(1.0, 5.0, rate_bound));
    let dt = 1e-3;
    let mut obs = ObserverState::at_rest(&state.nu);
    let mut mean = Vec6::zeros();
    for k in 0..20_000 {
        let (next, estimate) = observer_step(&obs, &gains, &model, &state, &input, dt);
        obs = next;
        // The sign term chatters at the step size; compare the mean of
        // the final second.
        if k >= 19_000 {
            mean += estimate / 1000.0;
        }
    }
    let err = estimate_error_signal(&expected, &mean);
    let tol = 0.2 * gains.iota2[0] * dt;
    for i in 0..6 {
        assert!(
            err[i].abs() < tol,
            "channel {i}: estimate {} vs {}",
            mean[i],
            expected[i]
        );
    }
}

#[test]
fn starts_with_a_zero_estimate() {
    let nu = Vec6::new(0.5, 0.0, 0.02, 0.0, 0.0, 0.01);
    assert_eq!(ObserverState::at_rest(&nu).estimate(), Vec6::zeros());
}
