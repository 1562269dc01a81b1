//! SeaWing glider model: kinematics, rigid-body dynamics, actuation and the
//! uncertain "modeled" copy used on the controller side.
//!
//! Frames follow the NED convention. The pose is carried as the full
//! `[X, Y, Z, phi, theta, psi]` vector; the controlled output is the
//! `[Z, theta, psi]` subset.

use nalgebra::{Matrix3, Matrix3x6, Matrix6x3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{GliderError, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec6 = Vector6<f64>;

/// Distance from the Euler pole at which the kinematic map is refused.
pub const POLE_MARGIN: f64 = 1e-6;
/// Surge speed below which the angle of attack is reported as zero.
pub const ATTACK_ANGLE_MIN_SURGE: f64 = 1e-3;
/// Condition number above which the input-gain inverse is damped.
pub const MAX_INPUT_GAIN_COND: f64 = 1e8;
/// Tikhonov damping used for an ill-conditioned input-gain matrix.
pub const INPUT_GAIN_DAMPING: f64 = 1e-6;

pub const IDX_X: usize = 0;
pub const IDX_Y: usize = 1;
pub const IDX_Z: usize = 2;
pub const IDX_PHI: usize = 3;
pub const IDX_THETA: usize = 4;
pub const IDX_PSI: usize = 5;

/// Physical and hydrodynamic constants of the glider.
///
/// Masses and inertias already include the added-mass terms. The default is
/// the SeaWing profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GliderParams {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Moving (sliding/rotating) mass.
    pub m_p: f64,
    /// Hull mass. Carried for completeness; it does not enter the equations.
    pub m_h: f64,
    /// Radial offset of the moving mass.
    pub r_p: f64,
    /// Buoyancy-mass position along body x.
    pub r_b: f64,
    pub k_d: f64,
    pub k_d0: f64,
    pub k_l: f64,
    pub k_l0: f64,
    pub k_beta: f64,
    pub k_mr: f64,
    pub k_p: f64,
    pub k_m: f64,
    pub k_m0: f64,
    pub k_q: f64,
    pub k_my: f64,
    pub k_r: f64,
    /// Gravity coefficient.
    pub g: f64,
}

impl Default for GliderParams {
    fn default() -> Self {
        Self::seawing()
    }
}

impl GliderParams {
    pub fn seawing() -> Self {
        Self {
            m1: 66.76,
            m2: 114.86,
            m3: 131.20,
            i1: 1.13,
            i2: 23.15,
            i3: 25.50,
            m_p: 11.0,
            m_h: 54.28,
            r_p: 0.014,
            r_b: 0.0,
            k_d: 386.29,
            k_d0: 7.19,
            k_l: 440.99,
            k_l0: -0.36,
            k_beta: -115.65,
            k_mr: -58.27,
            k_p: -19.83,
            k_m: -65.84,
            k_m0: 0.28,
            k_q: -205.64,
            k_my: 34.10,
            k_r: -389.30,
            g: 9.81,
        }
    }

    /// Every vehicle coefficient multiplied by `s`; gravity is a physical
    /// constant and is kept.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m1: self.m1 * s,
            m2: self.m2 * s,
            m3: self.m3 * s,
            i1: self.i1 * s,
            i2: self.i2 * s,
            i3: self.i3 * s,
            m_p: self.m_p * s,
            m_h: self.m_h * s,
            r_p: self.r_p * s,
            r_b: self.r_b * s,
            k_d: self.k_d * s,
            k_d0: self.k_d0 * s,
            k_l: self.k_l * s,
            k_l0: self.k_l0 * s,
            k_beta: self.k_beta * s,
            k_mr: self.k_mr * s,
            k_p: self.k_p * s,
            k_m: self.k_m * s,
            k_m0: self.k_m0 * s,
            k_q: self.k_q * s,
            k_my: self.k_my * s,
            k_r: self.k_r * s,
            g: self.g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
            ("i1", self.i1),
            ("i2", self.i2),
            ("i3", self.i3),
            ("m_p", self.m_p),
            ("m_h", self.m_h),
            ("r_p", self.r_p),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GliderError::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        let rest = [
            ("r_b", self.r_b),
            ("k_d", self.k_d),
            ("k_d0", self.k_d0),
            ("k_l", self.k_l),
            ("k_l0", self.k_l0),
            ("k_beta", self.k_beta),
            ("k_mr", self.k_mr),
            ("k_p", self.k_p),
            ("k_m", self.k_m),
            ("k_m0", self.k_m0),
            ("k_q", self.k_q),
            ("k_my", self.k_my),
            ("k_r", self.k_r),
            ("g", self.g),
        ];
        for (name, value) in rest {
            if !value.is_finite() {
                return Err(GliderError::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }
}

/// Full vehicle state: NED pose and body-frame velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    /// `[X, Y, Z, phi, theta, psi]`
    pub pose: Vec6,
    /// `[u, v, w, p, q, r]`
    pub nu: Vec6,
}

impl VehicleState {
    pub fn new(pose: Vec6, nu: Vec6) -> Self {
        Self { pose, nu }
    }

    /// Controlled output `[Z, theta, psi]`.
    pub fn eta(&self) -> Vec3 {
        Vec3::new(self.pose[IDX_Z], self.pose[IDX_THETA], self.pose[IDX_PSI])
    }

    pub fn is_finite(&self) -> bool {
        self.pose.iter().chain(self.nu.iter()).all(|v| v.is_finite())
    }
}

/// Actuator triple: buoyancy mass, moving-mass position, moving-mass angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub m_b: f64,
    pub r_p1: f64,
    pub gamma: f64,
}

impl ControlInput {
    pub fn new(m_b: f64, r_p1: f64, gamma: f64) -> Self {
        Self { m_b, r_p1, gamma }
    }

    pub fn from_vector(v: &Vec3) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.m_b, self.r_p1, self.gamma)
    }
}

/// Hard actuator limits, symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputBounds {
    pub m_b: f64,
    pub r_p1: f64,
    pub gamma: f64,
}

impl Default for InputBounds {
    fn default() -> Self {
        Self {
            m_b: 0.4,
            r_p1: 0.06,
            gamma: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl InputBounds {
    pub fn as_vector(&self) -> Vec3 {
        Vec3::new(self.m_b, self.r_p1, self.gamma)
    }
}

/// Multiplicative uncertainty between the plant and the controller's model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyConfig {
    pub fraction: f64,
    pub inertia: bool,
    pub coriolis: bool,
    pub damping: bool,
    pub actuation: bool,
    pub gravity: bool,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self::uniform(0.2)
    }
}

impl UncertaintyConfig {
    pub fn uniform(fraction: f64) -> Self {
        Self {
            fraction,
            inertia: true,
            coriolis: true,
            damping: true,
            actuation: true,
            gravity: true,
        }
    }

    pub fn none() -> Self {
        Self::uniform(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(GliderError::InvalidParameter {
                name: "uncertainty.fraction",
                reason: format!("must lie in [0, 1), got {}", self.fraction),
            });
        }
        Ok(())
    }
}

/// Coefficient scale used when evaluating each matrix family. Terms that
/// multiply two scaled coefficients (such as `m_p r_p`) pick up the
/// square of the factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyScale {
    pub inertia: f64,
    pub coriolis: f64,
    pub damping: f64,
    pub actuation: f64,
    pub gravity: f64,
}

impl Default for FamilyScale {
    fn default() -> Self {
        Self {
            inertia: 1.0,
            coriolis: 1.0,
            damping: 1.0,
            actuation: 1.0,
            gravity: 1.0,
        }
    }
}

/// A parameter set together with per-family scaling. The plant uses unit
/// scales; the controller-side model is produced by [`modeled_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GliderModel {
    pub params: GliderParams,
    pub scale: FamilyScale,
}

impl From<GliderParams> for GliderModel {
    fn from(params: GliderParams) -> Self {
        Self {
            params,
            scale: FamilyScale::default(),
        }
    }
}

/// Controller-side model: the coefficients of each enabled family are
/// scaled by `1 - fraction`.
pub fn modeled_params(params: &GliderParams, uncertainty: &UncertaintyConfig) -> GliderModel {
    let keep = 1.0 - uncertainty.fraction;
    let pick = |on: bool| if on { keep } else { 1.0 };
    GliderModel {
        params: *params,
        scale: FamilyScale {
            inertia: pick(uncertainty.inertia),
            coriolis: pick(uncertainty.coriolis),
            damping: pick(uncertainty.damping),
            actuation: pick(uncertainty.actuation),
            gravity: pick(uncertainty.gravity),
        },
    }
}

/// Fifth-order sine polynomial used for the moving-mass angle.
pub fn taylor_sin(gamma: f64) -> f64 {
    gamma - gamma.powi(3) / 6.0 + gamma.powi(5) / 120.0
}

/// Fourth-order cosine polynomial used for the moving-mass angle.
pub fn taylor_cos(gamma: f64) -> f64 {
    1.0 - gamma * gamma / 2.0 + gamma.powi(4) / 24.0
}

fn check_pole(theta: f64) -> Result<()> {
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - POLE_MARGIN || !theta.is_finite() {
        Err(GliderError::PitchPole { theta })
    } else {
        Ok(())
    }
}

/// Maps body velocity to `[Z_dot, theta_dot, psi_dot]`.
pub fn rotation_map(pose: &Vec6) -> Result<Matrix3x6<f64>> {
    let (phi, theta) = (pose[IDX_PHI], pose[IDX_THETA]);
    check_pole(theta)?;
    let (sphi, cphi) = phi.sin_cos();
    let (stheta, ctheta) = theta.sin_cos();
    let sec = 1.0 / ctheta;
    #[rustfmt::skip]
    let j = Matrix3x6::new(
        -stheta, sphi * ctheta, cphi * ctheta, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, cphi, -sphi,
        0.0, 0.0, 0.0, 0.0, sphi * sec, cphi * sec,
    );
    Ok(j)
}

/// Euler-angle rates `[phi_dot, theta_dot, psi_dot]` from body rates.
pub fn euler_rates(pose: &Vec6, nu: &Vec6) -> Result<Vec3> {
    let (phi, theta) = (pose[IDX_PHI], pose[IDX_THETA]);
    check_pole(theta)?;
    let (p, q, r) = (nu[3], nu[4], nu[5]);
    let (sphi, cphi) = phi.sin_cos();
    let (stheta, ctheta) = theta.sin_cos();
    let tan = stheta / ctheta;
    Ok(Vec3::new(
        p + sphi * tan * q + cphi * tan * r,
        cphi * q - sphi * r,
        (sphi * q + cphi * r) / ctheta,
    ))
}

/// Time derivative of [`rotation_map`] along the motion given by `nu`.
pub fn rotation_map_dot(pose: &Vec6, nu: &Vec6) -> Result<Matrix3x6<f64>> {
    let rates = euler_rates(pose, nu)?;
    let (phi_dot, theta_dot) = (rates[0], rates[1]);
    let (sphi, cphi) = pose[IDX_PHI].sin_cos();
    let (stheta, ctheta) = pose[IDX_THETA].sin_cos();
    let sec = 1.0 / ctheta;
    let sec_tan = stheta * sec * sec;
    #[rustfmt::skip]
    let jd = Matrix3x6::new(
        -ctheta * theta_dot,
        cphi * ctheta * phi_dot - sphi * stheta * theta_dot,
        -sphi * ctheta * phi_dot - cphi * stheta * theta_dot,
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, -sphi * phi_dot, -cphi * phi_dot,
        0.0, 0.0, 0.0, 0.0,
        cphi * sec * phi_dot + sphi * sec_tan * theta_dot,
        -sphi * sec * phi_dot + cphi * sec_tan * theta_dot,
    );
    Ok(jd)
}

/// Full 6-DOF pose rate: flat-earth body-to-NED rotation for the position
/// and the Euler kinematic map for the attitude.
pub fn pose_dot(pose: &Vec6, nu: &Vec6) -> Result<Vec6> {
    let rates = euler_rates(pose, nu)?;
    let (sphi, cphi) = pose[IDX_PHI].sin_cos();
    let (stheta, ctheta) = pose[IDX_THETA].sin_cos();
    let (spsi, cpsi) = pose[IDX_PSI].sin_cos();
    #[rustfmt::skip]
    let r_nb = Matrix3::new(
        cpsi * ctheta, -spsi * cphi + cpsi * stheta * sphi, spsi * sphi + cpsi * cphi * stheta,
        spsi * ctheta, cpsi * cphi + sphi * stheta * spsi, -cpsi * sphi + stheta * spsi * cphi,
        -stheta, ctheta * sphi, ctheta * cphi,
    );
    let vel = r_nb * Vec3::new(nu[0], nu[1], nu[2]);
    Ok(Vec6::new(vel[0], vel[1], vel[2], rates[0], rates[1], rates[2]))
}

/// Angle of attack `atan2(w, u)`, zero while the surge speed is negligible.
pub fn attack_angle(nu: &Vec6) -> f64 {
    if nu[0].abs() < ATTACK_ANGLE_MIN_SURGE {
        0.0
    } else {
        nu[2].atan2(nu[0])
    }
}

/// Sinusoidal environmental forcing in the body frame.
pub fn env_disturbance(t: f64) -> Vec6 {
    use std::f64::consts::PI;
    let slow = (PI * t / 100.0).sin();
    let heave = (2.0 * PI * t / 300.0).sin();
    Vec6::new(
        0.02 * slow,
        0.01 * slow,
        -0.02 * heave,
        0.01 * slow,
        0.02 * slow,
        -0.01 * slow,
    )
}

impl GliderModel {
    pub fn actual(params: GliderParams) -> Self {
        params.into()
    }

    /// Diagonal of the inertia matrix.
    pub fn mass_diag(&self) -> Vec6 {
        let p = self.params.scaled(self.scale.inertia);
        Vec6::new(p.m1, p.m2, p.m3, p.i1, p.i2, p.i3)
    }

    pub fn coriolis_vec(&self, nu: &Vec6) -> Vec6 {
        let p = self.params.scaled(self.scale.coriolis);
        let (u, v, w, pr, q, r) = (nu[0], nu[1], nu[2], nu[3], nu[4], nu[5]);
        Vec6::new(
            p.m2 * v * r - p.m3 * w * q,
            -p.m1 * u * r + p.m3 * w * pr,
            p.m1 * u * q - p.m2 * v * pr,
            p.m2 * v * w - p.m3 * w * v + p.i2 * q * r - p.i3 * r * q,
            -p.m1 * u * w + p.m3 * w * u - p.i1 * pr * r + p.i3 * r * pr,
            p.m1 * u * v - p.m2 * v * u + p.i1 * pr * q - p.i2 * q * pr,
        )
    }

    pub fn damping_vec(&self, nu: &Vec6) -> Vec6 {
        let p = self.params.scaled(self.scale.damping);
        let (u, v, w, pr, q, r) = (nu[0], nu[1], nu[2], nu[3], nu[4], nu[5]);
        let uu = u * u;
        Vec6::new(
            p.k_l0 * u * w - p.k_d0 * uu,
            p.k_beta * u * v - p.k_d0 * u * v,
            -p.k_l0 * uu - p.k_d0 * u * w - p.k_l * w * u,
            p.k_p * pr * uu + p.k_mr * u * v - p.k_m0 * u * v,
            p.k_m0 * uu + p.k_q * q * uu + p.k_m * u * w,
            p.k_r * r * uu + p.k_my * u * v,
        )
    }

    /// Input matrix with the moving-mass trigonometry replaced by its
    /// Taylor polynomials, evaluated at `gamma`.
    pub fn actuation_matrix(&self, pose: &Vec6, gamma: f64) -> Matrix6x3<f64> {
        let p = self.params.scaled(self.scale.actuation);
        let g = p.g;
        let (sphi, cphi) = pose[IDX_PHI].sin_cos();
        let (stheta, ctheta) = pose[IDX_THETA].sin_cos();
        let even = 1.0 - gamma * gamma / 6.0 + gamma.powi(4) / 120.0;
        let odd = -gamma / 2.0 + gamma.powi(3) / 24.0;
        let mpg = p.m_p * g;
        let mprpg = p.m_p * p.r_p * g;
        #[rustfmt::skip]
        let b = Matrix6x3::new(
            -g * stheta, 0.0, 0.0,
            g * ctheta * sphi, 0.0, 0.0,
            g * ctheta * cphi, 0.0, 0.0,
            0.0, 0.0, -mprpg * ctheta * (cphi * even - sphi * odd),
            -g * cphi * ctheta * p.r_b, -mpg * cphi * ctheta, -mprpg * stheta * odd,
            g * ctheta * sphi * p.r_b, mpg * ctheta * sphi, mprpg * stheta * even,
        );
        b
    }

    pub fn gravity_vec(&self, pose: &Vec6) -> Vec6 {
        let p = self.params.scaled(self.scale.gravity);
        let k = p.g * p.r_p * p.m_p;
        Vec6::new(0.0, 0.0, 0.0, -k * pose[IDX_PHI].cos(), -k * pose[IDX_THETA].sin(), 0.0)
    }

    /// `C nu + D nu + B(gamma) U + E` for the applied input.
    pub fn generalized_force(&self, state: &VehicleState, input: &ControlInput) -> Vec6 {
        self.coriolis_vec(&state.nu)
            + self.damping_vec(&state.nu)
            + self.actuation_matrix(&state.pose, input.gamma) * input.to_vector()
            + self.gravity_vec(&state.pose)
    }

    /// `M^-1 (C nu + D nu + B U + E + forcing)`.
    pub fn nu_dot(&self, state: &VehicleState, input: &ControlInput, forcing: &Vec6) -> Vec6 {
        (self.generalized_force(state, input) + forcing).component_div(&self.mass_diag())
    }
}

/// Plant right-hand side using the actual parameters. `tau_d` is the
/// environmental forcing, `extra` any additional body-frame load.
pub fn plant_rhs(
    plant: &GliderModel,
    state: &VehicleState,
    input: &ControlInput,
    tau_d: &Vec6,
    extra: &Vec6,
) -> Result<(Vec6, Vec6)> {
    let pd = pose_dot(&state.pose, &state.nu)?;
    let nd = plant.nu_dot(state, input, &(tau_d + extra));
    Ok((pd, nd))
}

/// Output-space model `eta_ddot = f + g U + h d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactTerms {
    pub f: Vec3,
    pub g: Matrix3<f64>,
    pub h: Matrix3x6<f64>,
}

/// Result of inverting the input-gain matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSolution {
    pub input: Vec3,
    pub damped: bool,
}

/// Compact output dynamics from `model`; `gamma` selects where the
/// moving-mass polynomials inside `B` are evaluated.
pub fn compact_terms(model: &GliderModel, state: &VehicleState, gamma: f64) -> Result<CompactTerms> {
    let j = rotation_map(&state.pose)?;
    let jd = rotation_map_dot(&state.pose, &state.nu)?;
    let inv_m = model.mass_diag().map(|m| 1.0 / m);
    let h = Matrix3x6::from_fn(|r, c| j[(r, c)] * inv_m[c]);
    let drift = model.coriolis_vec(&state.nu) + model.damping_vec(&state.nu) + model.gravity_vec(&state.pose);
    let f = jd * state.nu + h * drift;
    let g = h * model.actuation_matrix(&state.pose, gamma);
    Ok(CompactTerms { f, g, h })
}

/// Ratio of extreme singular values (infinite for a rank-deficient matrix).
pub fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

impl CompactTerms {
    /// Exact solve of `g U = rhs`; errors when `g` is ill-conditioned.
    pub fn solve_exact(&self, rhs: &Vec3) -> Result<Vec3> {
        let cond = condition_number(&self.g);
        if cond > MAX_INPUT_GAIN_COND {
            return Err(GliderError::SingularInputGain { cond });
        }
        self.g.lu().solve(rhs).ok_or(GliderError::SingularInputGain { cond })
    }

    /// Solve `g U = rhs`, switching to a Tikhonov-damped least-squares
    /// solution when `g` is ill-conditioned.
    pub fn solve_input(&self, rhs: &Vec3) -> Result<InputSolution> {
        match self.solve_exact(rhs) {
            Ok(input) => Ok(InputSolution { input, damped: false }),
            Err(GliderError::SingularInputGain { cond }) => {
                let gt = self.g.transpose();
                let normal = gt * self.g + Matrix3::identity() * INPUT_GAIN_DAMPING;
                let input = normal
                    .cholesky()
                    .map(|c| c.solve(&(gt * rhs)))
                    .ok_or(GliderError::SingularInputGain { cond })?;
                Ok(InputSolution { input, damped: true })
            }
            Err(e) => Err(e),
        }
    }
}
