//! Reference generation: the attitude-switching schedule, the depth ramp,
//! pitch from gliding angle, and integral line-of-sight waypoint guidance.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{GliderError, Result};

/// Length of one block of the switching schedule.
pub const SCHEDULE_BLOCK: f64 = 200.0;
/// Descent rate of the depth ramp.
pub const DEPTH_RATE: f64 = 0.1;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1Reference {
    pub z_d: f64,
    pub z_dot_d: f64,
    /// Desired gliding angle.
    pub xi_d: f64,
    pub psi_d: f64,
}

/// Index of the schedule block containing `t`. The last block is closed
/// on the right, so `t = 800` still belongs to block 3.
pub fn schedule_block(t: f64) -> usize {
    let k = (t / SCHEDULE_BLOCK).floor().max(0.0) as usize;
    if t <= 4.0 * SCHEDULE_BLOCK {
        k.min(3)
    } else {
        k
    }
}

/// Desired gliding angle; alternates every block and repeats after 800 s.
pub fn gliding_angle_reference(t: f64) -> f64 {
    if schedule_block(t).is_multiple_of(2) {
        -PI / 4.0
    } else {
        -PI / 3.0
    }
}

/// Heading schedule of the attitude-switching scenario; the last value is
/// held after 800 s.
pub fn heading_schedule(t: f64) -> f64 {
    match schedule_block(t) {
        0 => PI / 6.0,
        1 => 0.0,
        2 => -PI / 6.0,
        _ => PI / 10.0,
    }
}

pub fn depth_reference(t: f64) -> (f64, f64) {
    (DEPTH_RATE * t, DEPTH_RATE)
}

pub fn case1_reference(t: f64) -> Case1Reference {
    let (z_d, z_dot_d) = depth_reference(t);
    Case1Reference {
        z_d,
        z_dot_d,
        xi_d: gliding_angle_reference(t),
        psi_d: heading_schedule(t),
    }
}

/// `theta_d = xi_d + alpha`.
pub fn pitch_reference(xi_d: f64, alpha: f64) -> f64 {
    xi_d + alpha
}

/// Azimuth of the segment `from -> to`.
pub fn path_azimuth(from: [f64; 2], to: [f64; 2]) -> Result<f64> {
    let (dx, dy) = (to[0] - from[0], to[1] - from[1]);
    if dx == 0.0 && dy == 0.0 {
        return Err(GliderError::DegenerateSegment { x: from[0], y: from[1] });
    }
    Ok(dy.atan2(dx))
}

/// Signed cross-track error of `position` relative to the line through
/// `from -> to`, positive to the right of the direction of travel.
pub fn cross_track(position: [f64; 2], from: [f64; 2], to: [f64; 2]) -> Result<f64> {
    let chi = path_azimuth(from, to)?;
    let (s, c) = chi.sin_cos();
    Ok(-(position[0] - from[0]) * s + (position[1] - from[1]) * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IlosGains {
    /// Line-of-sight distance.
    pub lookahead: f64,
    pub k_i: f64,
}

impl Default for IlosGains {
    fn default() -> Self {
        Self {
            lookahead: 2.5,
            k_i: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IlosState {
    pub sigma: f64,
}

/// Rate of the integral state.
pub fn ilos_sigma_rate(state: &IlosState, gains: &IlosGains, y_e: f64) -> f64 {
    let la = gains.lookahead;
    let shifted = y_e + gains.k_i * state.sigma;
    la * y_e / (la * la + shifted * shifted)
}

/// Path-relative heading command `-atan((y_e + k_I sigma) / Lambda)` and the
/// integral state advanced by one explicit step.
pub fn ilos_step(state: &IlosState, gains: &IlosGains, y_e: f64, dt: f64) -> (f64, IlosState) {
    let psi = -((y_e + gains.k_i * state.sigma) / gains.lookahead).atan();
    let next = IlosState {
        sigma: state.sigma + dt * ilos_sigma_rate(state, gains, y_e),
    };
    (psi, next)
}

/// Time derivative of the path-relative heading command given the
/// cross-track rate.
pub fn ilos_heading_rate(state: &IlosState, gains: &IlosGains, y_e: f64, y_e_dot: f64) -> f64 {
    let la = gains.lookahead;
    let shifted = y_e + gains.k_i * state.sigma;
    let shifted_dot = y_e_dot + gains.k_i * ilos_sigma_rate(state, gains, y_e);
    -la * shifted_dot / (la * la + shifted * shifted)
}

/// Rate of the cross-track error for a horizontal velocity `(x_dot, y_dot)`.
pub fn cross_track_rate(velocity: [f64; 2], from: [f64; 2], to: [f64; 2]) -> Result<f64> {
    let (s, c) = path_azimuth(from, to)?.sin_cos();
    Ok(-velocity[0] * s + velocity[1] * c)
}

/// Ordered horizontal waypoints with an acceptance radius.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPlan {
    pub waypoints: Vec<[f64; 2]>,
    pub radius: f64,
    /// Index of the current target; equals `waypoints.len()` when done.
    pub index: usize,
    /// Start of the current leg.
    pub leg_start: [f64; 2],
}

impl WaypointPlan {
    pub fn new(waypoints: Vec<[f64; 2]>, radius: f64, start: [f64; 2]) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(GliderError::InvalidParameter {
                name: "guidance.waypoints",
                reason: "at least one waypoint is required".into(),
            });
        }
        if !(radius > 0.0) {
            return Err(GliderError::InvalidParameter {
                name: "guidance.radius",
                reason: format!("must be positive, got {radius}"),
            });
        }
        Ok(Self {
            waypoints,
            radius,
            index: 0,
            leg_start: start,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.index >= self.waypoints.len()
    }

    pub fn target(&self) -> Option<[f64; 2]> {
        self.waypoints.get(self.index).copied()
    }

    /// Current leg `(from, to)`; after completion, the final leg.
    pub fn leg(&self) -> ([f64; 2], [f64; 2]) {
        if let Some(to) = self.target() {
            (self.leg_start, to)
        } else {
            let n = self.waypoints.len();
            let to = self.waypoints[n - 1];
            let from = if n >= 2 { self.waypoints[n - 2] } else { self.leg_start };
            (from, to)
        }
    }
}

/// Advance the plan when `position` is within the acceptance radius of the
/// current target.
pub fn waypoint_update(plan: &WaypointPlan, position: [f64; 2]) -> (WaypointPlan, bool) {
    let Some(target) = plan.target() else {
        return (plan.clone(), false);
    };
    let dist = ((position[0] - target[0]).powi(2) + (position[1] - target[1]).powi(2)).sqrt();
    if dist <= plan.radius {
        let mut next = plan.clone();
        next.index += 1;
        next.leg_start = target;
        (next, true)
    } else {
        (plan.clone(), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn case1_schedule_samples() {
        let r = case1_reference(100.0);
        assert_eq!((r.xi_d, r.psi_d), (-PI / 4.0, PI / 6.0));
        assert_relative_eq!(r.z_d, 10.0, epsilon = 1e-12);
        let r = case1_reference(450.0);
        assert_eq!((r.xi_d, r.psi_d), (-PI / 4.0, -PI / 6.0));
        assert_relative_eq!(r.z_d, 45.0, epsilon = 1e-12);
        let r = case1_reference(700.0);
        assert_eq!((r.xi_d, r.psi_d), (-PI / 3.0, PI / 10.0));
    }

    #[test]
    fn case1_block_boundaries() {
        assert_eq!(case1_reference(200.0).xi_d, -PI / 3.0);
        assert_eq!(case1_reference(200.0).psi_d, 0.0);
        assert_eq!(case1_reference(400.0).xi_d, -PI / 4.0);
        assert_eq!(case1_reference(400.0).psi_d, -PI / 6.0);
        assert_eq!(case1_reference(600.0).xi_d, -PI / 3.0);
        assert_eq!(case1_reference(600.0).psi_d, PI / 10.0);
        assert_eq!(case1_reference(800.0).xi_d, -PI / 3.0);
        assert_eq!(case1_reference(800.0).psi_d, PI / 10.0);
        assert_eq!(case1_reference(199.999).psi_d, PI / 6.0);
    }

    #[test]
    fn pitch_reference_sums() {
        assert_eq!(pitch_reference(-PI / 4.0, 0.0), -PI / 4.0);
        assert_eq!(pitch_reference(-PI / 3.0, 0.05), -PI / 3.0 + 0.05);
    }

    #[test]
    fn cross_track_examples() {
        assert_eq!(cross_track([3.0, 0.0], [0.0, 0.0], [10.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(cross_track([4.0, 3.0], [0.0, 0.0], [10.0, 0.0]).unwrap(), 3.0);
        assert!(cross_track([1.0, 1.0], [2.0, 2.0], [2.0, 2.0]).is_err());
    }

    #[test]
    fn ilos_examples() {
        let gains = IlosGains::default();
        let (psi, next) = ilos_step(&IlosState::default(), &gains, 0.0, 0.1);
        assert_eq!(psi, 0.0);
        assert_eq!(next.sigma, 0.0);
        let (psi, _) = ilos_step(&IlosState::default(), &gains, 2.5, 0.1);
        assert_relative_eq!(psi, -PI / 4.0, epsilon = 1e-15);
        assert_relative_eq!(ilos_sigma_rate(&IlosState::default(), &gains, 2.5), 0.5);
    }

    #[test]
    fn waypoint_switching() {
        let plan = WaypointPlan::new(vec![[10.0, 5.0], [15.0, -10.0]], 5.0, [0.0, 0.0]).unwrap();
        let (next, switched) = waypoint_update(&plan, [10.1, 5.0]);
        assert!(switched);
        assert_eq!(next.index, 1);
        assert_eq!(next.leg_start, [10.0, 5.0]);
        let (_, on_edge) = waypoint_update(&plan, [15.0, 5.0]);
        assert!(on_edge);
        let (_, far) = waypoint_update(&plan, [0.0, 0.0]);
        assert!(!far);
        let (done, _) = waypoint_update(&next, [15.0, -10.0]);
        assert!(done.is_complete());
        assert_eq!(done.leg(), ([10.0, 5.0], [15.0, -10.0]));
        assert_eq!(waypoint_update(&done, [0.0, 0.0]), (done.clone(), false));
    }

    #[test]
    fn wrap_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(0.3), 0.3);
    }

    #[test]
    fn heading_rate_matches_finite_difference() {
        let gains = IlosGains::default();
        let (y0, ydot, sigma) = (1.3, -0.2, 4.0);
        let h = 1e-6;
        let psi_at = |dt: f64| {
            let st = IlosState {
                sigma: sigma + dt * ilos_sigma_rate(&IlosState { sigma }, &gains, y0),
            };
            ilos_step(&st, &gains, y0 + ydot * dt, 0.0).0
        };
        let fd = (psi_at(h) - psi_at(-h)) / (2.0 * h);
        let rate = ilos_heading_rate(&IlosState { sigma }, &gains, y0, ydot);
        assert_relative_eq!(rate, fd, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn ilos_heading_is_odd_and_bounded(y in -100.0f64..100.0, sigma in -500.0f64..500.0) {
            let gains = IlosGains::default();
            let (a, _) = ilos_step(&IlosState { sigma }, &gains, y, 0.01);
            let (b, _) = ilos_step(&IlosState { sigma: -sigma }, &gains, -y, 0.01);
            prop_assert_eq!(a, -b);
            prop_assert!(a.abs() < PI / 2.0);
        }

        #[test]
        fn sigma_rate_bounded(y in -100.0f64..100.0, sigma in -500.0f64..500.0) {
            let gains = IlosGains::default();
            let rate = ilos_sigma_rate(&IlosState { sigma }, &gains, y);
            prop_assert!(rate.abs() <= y.abs() / gains.lookahead + 1e-15);
        }

        #[test]
        fn cross_track_flips_under_reflection(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let a = cross_track([x, y], [0.0, 0.0], [10.0, 0.0]).unwrap();
            let b = cross_track([x, -y], [0.0, 0.0], [10.0, 0.0]).unwrap();
            prop_assert_eq!(a, -b);
        }
    }
}
