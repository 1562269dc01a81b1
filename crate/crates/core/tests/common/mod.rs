//! Randomised sweeps shared by the oracle tests and the acceptance target.
//! Each sweep returns the worst error it saw over all points.

#![allow(dead_code)]

use glider_core::control::{fxtppc_control, FxtGains};
use glider_core::dynamics::{
    compact_terms, modeled_params, pose_dot, rotation_map, rotation_map_dot, ControlInput, GliderModel, GliderParams,
    UncertaintyConfig, Vec3, Vec6, VehicleState,
};
use glider_core::envelope::{transform_derivatives, transform_error, EnvelopeKind, PerformanceSpec, TransformedError};
use glider_core::sig::sig;
use glider_core::sim::metrics::truth_disturbance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x6c1d_e2a5;

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

/// Richardson-extrapolated central difference, fourth order in `h`.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> PerformanceSpec {
    let p0 = rng.gen_range(0.3..2.0);
    let mut spec = PerformanceSpec::new(p0, rng.gen_range(0.02..0.5), rng.gen_range(20.0..200.0));
    spec.delta_l = rng.gen_range(0.5..=1.0);
    spec.delta_r = rng.gen_range(0.5..=1.0);
    spec
}

fn random_kind(rng: &mut ChaCha8Rng) -> EnvelopeKind {
    if rng.gen_bool(0.5) {
        EnvelopeKind::Sech
    } else {
        EnvelopeKind::PpcBaseline
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnvelopeErrors {
    pub p_dot: f64,
    pub p_ddot: f64,
}

/// Envelope rates against differences of the envelope and of its rate.
pub fn envelope_sweep(points: usize) -> EnvelopeErrors {
    let mut rng = rng();
    let mut worst = EnvelopeErrors::default();
    for _ in 0..points {
        let spec = random_spec(&mut rng);
        let kind = random_kind(&mut rng);
        let t = rng.gen_range(0.02..0.8) * spec.settle_time;
        let h = 1e-3 * spec.settle_time.min(spec.settle_time - t);
        let v = kind.evaluate(t, &spec);
        let fd1 = derivative(|s| kind.evaluate(s, &spec).p, t, h);
        let fd2 = derivative(|s| kind.evaluate(s, &spec).p_dot, t, h);
        worst.p_dot = worst.p_dot.max(rel_err(v.p_dot, fd1));
        worst.p_ddot = worst.p_ddot.max(rel_err(v.p_ddot, fd2));
    }
    worst
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TransformErrors {
    pub epsilon_dot: f64,
    pub lambda_dot: f64,
    /// `eps_ddot = kappa + lambda e_ddot`.
    pub kappa: f64,
}

/// A smooth error trajectory `e(t) = P(t) r(t)` that stays inside the band.
struct Trajectory {
    spec: PerformanceSpec,
    kind: EnvelopeKind,
    center: f64,
    amp: f64,
    omega: f64,
    phase: f64,
}

impl Trajectory {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let spec = random_spec(rng);
        let reach = 0.9 * spec.delta_l.min(spec.delta_r);
        let center = rng.gen_range(-0.5..0.5) * reach;
        Self {
            spec,
            kind: random_kind(rng),
            center,
            amp: rng.gen_range(0.0..1.0) * (reach - center.abs()),
            omega: rng.gen_range(0.01..0.5),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        }
    }

    /// `(e, e_dot, e_ddot)` at `t`.
    fn error(&self, t: f64) -> (f64, f64, f64) {
        let v = self.kind.evaluate(t, &self.spec);
        let arg = self.omega * t + self.phase;
        let r = self.center + self.amp * arg.sin();
        let r1 = self.amp * self.omega * arg.cos();
        let r2 = -self.amp * self.omega * self.omega * arg.sin();
        (
            v.p * r,
            v.p_dot * r + v.p * r1,
            v.p_ddot * r + 2.0 * v.p_dot * r1 + v.p * r2,
        )
    }

    /// Difference step resolving both the envelope and the oscillation.
    fn step(&self, t: f64) -> f64 {
        let big_t = self.spec.settle_time;
        1e-3 * (big_t - t).min(1.0 / self.omega)
    }

    fn transformed(&self, t: f64) -> TransformedError {
        let (e, e_dot, _) = self.error(t);
        let env = self.kind.evaluate(t, &self.spec);
        transform_derivatives(e, e_dot, &env, self.spec.delta_l, self.spec.delta_r)
    }
}

/// Transformed-error rates against differences along a smooth trajectory.
pub fn transform_sweep(points: usize) -> TransformErrors {
    let mut rng = rng();
    let mut worst = TransformErrors::default();
    for _ in 0..points {
        let traj = Trajectory::random(&mut rng);
        let big_t = traj.spec.settle_time;
        let t = rng.gen_range(0.02..0.8) * big_t;
        let h = traj.step(t);
        let te = traj.transformed(t);
        assert!(!te.violated, "trajectory left the band");
        let eps = |s: f64| {
            let (e, _, _) = traj.error(s);
            let p = traj.kind.evaluate(s, &traj.spec).p;
            transform_error(e, p, traj.spec.delta_l, traj.spec.delta_r).0
        };
        worst.epsilon_dot = worst.epsilon_dot.max(rel_err(te.epsilon_dot, derivative(eps, t, h)));
        let lam = derivative(|s| traj.transformed(s).lambda, t, h);
        worst.lambda_dot = worst.lambda_dot.max(rel_err(te.lambda_dot, lam));
        let (_, _, e_ddot) = traj.error(t);
        let eps_ddot = derivative(|s| traj.transformed(s).epsilon_dot, t, h);
        worst.kappa = worst.kappa.max(rel_err(te.kappa + te.lambda * e_ddot, eps_ddot));
    }
    worst
}

pub fn random_state(rng: &mut ChaCha8Rng) -> VehicleState {
    use std::f64::consts::PI;
    let pose = Vec6::new(
        rng.gen_range(-50.0..50.0),
        rng.gen_range(-50.0..50.0),
        rng.gen_range(0.0..100.0),
        rng.gen_range(-PI..PI),
        rng.gen_range(-1.3..1.3),
        rng.gen_range(-PI..PI),
    );
    let nu = Vec6::from_fn(|i, _| {
        if i < 3 {
            rng.gen_range(-1.0..1.0)
        } else {
            rng.gen_range(-0.5..0.5)
        }
    });
    VehicleState::new(pose, nu)
}

pub fn random_input(rng: &mut ChaCha8Rng) -> ControlInput {
    ControlInput::new(
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.1..0.1),
        rng.gen_range(-1.5..1.5),
    )
}

/// Rate of the output map against a difference along the pose flow.
pub fn rotation_map_sweep(points: usize) -> f64 {
    let mut rng = rng();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let s = random_state(&mut rng);
        let flow = pose_dot(&s.pose, &s.nu).unwrap();
        let analytic = rotation_map_dot(&s.pose, &s.nu).unwrap();
        let h = 1e-4;
        let at = |k: f64| rotation_map(&(s.pose + flow * k)).unwrap();
        let numeric = (at(h / 2.0) - at(-h / 2.0)) * (4.0 / (3.0 * h)) - (at(h) - at(-h)) / (6.0 * h);
        let err = (analytic - numeric).norm() / analytic.norm().max(numeric.norm());
        worst = worst.max(err);
    }
    worst
}

pub fn uncertain_model() -> (GliderModel, GliderModel) {
    let params = GliderParams::seawing();
    (
        GliderModel::actual(params),
        modeled_params(&params, &UncertaintyConfig::uniform(0.2)),
    )
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityErrors {
    /// Body frame: `M_mod^-1 (F_mod + d) = nu_dot`.
    pub body: f64,
    /// Output frame: `f + g U + h d = J_dot nu + J nu_dot`.
    pub compact: f64,
    /// Closed-loop transformed dynamics under exact compensation.
    pub fxtppc: f64,
}

fn vec_rel<const N: usize>(a: &nalgebra::SVector<f64, N>, b: &nalgebra::SVector<f64, N>, scale: f64) -> f64 {
    (a - b).amax() / scale.max(a.amax()).max(b.amax())
}

/// Algebraic identities of the model split and of the fixed-time law.
pub fn identity_sweep(points: usize) -> IdentityErrors {
    let (plant, model) = uncertain_model();
    let gains = FxtGains::default();
    let exps = gains.exponents().unwrap();
    let mut rng = rng();
    let mut worst = IdentityErrors::default();
    for _ in 0..points {
        let s = random_state(&mut rng);
        let input = random_input(&mut rng);
        let tau = Vec6::from_fn(|_, _| rng.gen_range(-0.05..0.05));
        let nu_dot = plant.nu_dot(&s, &input, &tau);
        let d = truth_disturbance(&model, &s, &input, &nu_dot);

        let rebuilt = (model.generalized_force(&s, &input) + d).component_div(&model.mass_diag());
        worst.body = worst.body.max(vec_rel(&rebuilt, &nu_dot, 0.0));

        let terms = compact_terms(&model, &s, input.gamma).unwrap();
        let j = rotation_map(&s.pose).unwrap();
        let jd = rotation_map_dot(&s.pose, &s.nu).unwrap();
        let eta_ddot = jd * s.nu + j * nu_dot;
        let compact = terms.f + terms.g * input.to_vector() + terms.h * d;
        worst.compact = worst.compact.max(vec_rel(&compact, &eta_ddot, 0.0));

        // Exact compensation: with d_hat = d and the command applied
        // unsaturated, eps_ddot follows the fixed-time target dynamics.
        let te: [TransformedError; 3] =
            [0, 1, 2].map(|_| Trajectory::random(&mut rng).transformed(rng.gen_range(0.0..15.0)));
        let surface = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let eta_ddot_d = Vec3::from_fn(|_, _| rng.gen_range(-0.01..0.01));
        let terms = compact_terms(&model, &s, rng.gen_range(-1.5..1.5)).unwrap();
        let out = fxtppc_control(&terms, &eta_ddot_d, &te, &surface, &d, &gains).unwrap();
        if out.damped {
            continue;
        }
        let eta_ddot = terms.f + terms.g * out.raw.to_vector() + terms.h * d;
        for i in 0..3 {
            let triple = |a: f64, b: f64, y: f64| sig(a, y) + y + sig(b, y);
            let t1 = triple(exps[i].rho1, exps[i].rho1_prime, te[i].epsilon);
            let t2 = triple(exps[i].rho2, exps[i].rho2_prime, te[i].epsilon_dot);
            let inv_mu = 1.0 / gains.mu[i];
            let reach = triple(1.0 + inv_mu, 1.0 - inv_mu, surface[i]);
            let target = -gains.k1[i] * t1 - gains.k2[i] * t2 - (gains.k1[i] + gains.k2[i]) * reach;
            let lam_e = te[i].lambda * (eta_ddot[i] - eta_ddot_d[i]);
            let achieved = te[i].kappa + lam_e;
            // Relative to the largest term that cancels in the sum.
            let scale = target.abs().max(te[i].kappa.abs()).max(lam_e.abs());
            worst.fxtppc = worst.fxtppc.max((achieved - target).abs() / scale);
        }
    }
    worst
}
