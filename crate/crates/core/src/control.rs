//! Control laws: the fixed-time prescribed-performance law with its integral
//! sliding surface, the SMC and PPC baselines, and actuator saturation.

use serde::{Deserialize, Serialize};

use crate::dynamics::{CompactTerms, ControlInput, InputBounds, Vec3, Vec6};
use crate::envelope::TransformedError;
use crate::error::{GliderError, Result};
use crate::sig::sig;

/// Exponents of the integral sliding surface derived from `varrho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub rho1: f64,
    pub rho1_prime: f64,
    pub rho2: f64,
    pub rho2_prime: f64,
}

pub fn exponent_schedule(varrho: f64) -> Result<Exponents> {
    if !(varrho > 0.0 && varrho < 1.0) {
        return Err(GliderError::InvalidParameter {
            name: "varrho",
            reason: format!("must lie in (0, 1), got {varrho}"),
        });
    }
    Ok(Exponents {
        rho1: varrho / (2.0 - varrho),
        rho1_prime: varrho,
        rho2: (4.0 - 3.0 * varrho) / (2.0 - varrho),
        rho2_prime: (4.0 - 3.0 * varrho) / (3.0 - 2.0 * varrho),
    })
}

/// Gains of the fixed-time law, one entry per channel (depth, pitch, heading).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FxtGains {
    pub varrho: [f64; 3],
    pub mu: [f64; 3],
    pub k1: [f64; 3],
    pub k2: [f64; 3],
    /// Freeze the surface integrals while the paired actuator saturates.
    pub anti_windup: bool,
}

impl Default for FxtGains {
    fn default() -> Self {
        Self {
            varrho: [0.8; 3],
            mu: [2.0; 3],
            k1: [0.001, 0.01, 0.001],
            k2: [0.01, 0.2, 0.08],
            anti_windup: true,
        }
    }
}

impl FxtGains {
    pub fn exponents(&self) -> Result<[Exponents; 3]> {
        Ok([
            exponent_schedule(self.varrho[0])?,
            exponent_schedule(self.varrho[1])?,
            exponent_schedule(self.varrho[2])?,
        ])
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents()?;
        for i in 0..3 {
            if !(self.mu[i] > 1.0) {
                return Err(GliderError::InvalidParameter {
                    name: "fxtppc.mu",
                    reason: format!("must exceed 1, got {}", self.mu[i]),
                });
            }
            if !(self.k1[i] > 0.0 && self.k2[i] > 0.0) {
                return Err(GliderError::InvalidParameter {
                    name: "fxtppc.k1/k2",
                    reason: "gains must be positive".into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmcGains {
    pub c0: [f64; 3],
    pub c1: [f64; 3],
    pub c2: [f64; 3],
}

impl Default for SmcGains {
    fn default() -> Self {
        Self {
            c0: [0.1; 3],
            c1: [1.0; 3],
            c2: [5.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpcGains {
    pub l0: [f64; 3],
    pub l2: [f64; 3],
    /// Margin kept above the online lower bound for `l1`.
    pub l1_margin: f64,
}

impl Default for PpcGains {
    fn default() -> Self {
        Self {
            l0: [0.1; 3],
            l2: [1.0, 1.0, 3.0],
            l1_margin: 0.1,
        }
    }
}

/// Running integrals of the sliding surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlidingState {
    /// `int (sig^rho1 + sig^1 + sig^rho1') (eps1)`
    pub int1: Vec3,
    /// `int (sig^rho2 + sig^1 + sig^rho2') (eps2)`
    pub int2: Vec3,
    pub s: Vec3,
}

fn triple_sig(a: f64, b: f64, y: f64) -> f64 {
    sig(a, y) + y + sig(b, y)
}

fn eps1_terms(exps: &[Exponents; 3], eps1: &Vec3) -> Vec3 {
    Vec3::from_fn(|i, _| triple_sig(exps[i].rho1, exps[i].rho1_prime, eps1[i]))
}

fn eps2_terms(exps: &[Exponents; 3], eps2: &Vec3) -> Vec3 {
    Vec3::from_fn(|i, _| triple_sig(exps[i].rho2, exps[i].rho2_prime, eps2[i]))
}

impl SlidingState {
    /// Surface value for the current accumulators.
    pub fn surface(&self, gains: &FxtGains, eps2: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| eps2[i] + gains.k1[i] * self.int1[i] + gains.k2[i] * self.int2[i])
    }

    /// Left-rectangle update of the accumulators; channels flagged in
    /// `freeze` keep their value.
    pub fn advance(
        &self,
        gains: &FxtGains,
        exps: &[Exponents; 3],
        eps1: &Vec3,
        eps2: &Vec3,
        dt: f64,
        freeze: [bool; 3],
    ) -> SlidingState {
        let t1 = eps1_terms(exps, eps1);
        let t2 = eps2_terms(exps, eps2);
        let mut next = *self;
        for i in 0..3 {
            if !freeze[i] {
                next.int1[i] += t1[i] * dt;
                next.int2[i] += t2[i] * dt;
            }
        }
        next.s = next.surface(gains, eps2);
        next
    }
}

/// Surface at the current accumulators, then the accumulators advanced by
/// one step.
pub fn sliding_surface_step(
    state: &SlidingState,
    eps1: &Vec3,
    eps2: &Vec3,
    gains: &FxtGains,
    dt: f64,
) -> Result<(SlidingState, Vec3)> {
    let exps = gains.exponents()?;
    let s = state.surface(gains, eps2);
    let next = state.advance(gains, &exps, eps1, eps2, dt, [false; 3]);
    Ok((next, s))
}

/// Unsaturated command together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub raw: ControlInput,
    /// Desired output acceleration handed to `g^-1`.
    pub virtual_input: Vec3,
    pub damped: bool,
}

fn solve(terms: &CompactTerms, virtual_input: Vec3) -> Result<ControlOutput> {
    let sol = terms.solve_input(&virtual_input)?;
    if !sol.input.iter().all(|v| v.is_finite()) {
        return Err(GliderError::SingularInputGain { cond: f64::INFINITY });
    }
    Ok(ControlOutput {
        raw: ControlInput::from_vector(&sol.input),
        virtual_input,
        damped: sol.damped,
    })
}

fn lambdas(te: &[TransformedError; 3]) -> Vec3 {
    Vec3::new(te[0].lambda, te[1].lambda, te[2].lambda)
}

fn kappas(te: &[TransformedError; 3]) -> Vec3 {
    Vec3::new(te[0].kappa, te[1].kappa, te[2].kappa)
}

/// Virtual input of the fixed-time law before inversion by `g`:
/// `-L^-1 K + eta_ddot_d - f - h d_hat + u_eps + u_s`.
pub fn fxtppc_virtual_input(
    terms: &CompactTerms,
    eta_ddot_d: &Vec3,
    te: &[TransformedError; 3],
    s: &Vec3,
    d_hat: &Vec6,
    gains: &FxtGains,
    exps: &[Exponents; 3],
) -> Vec3 {
    let lam = lambdas(te);
    let kap = kappas(te);
    let eps1 = Vec3::new(te[0].epsilon, te[1].epsilon, te[2].epsilon);
    let eps2 = Vec3::new(te[0].epsilon_dot, te[1].epsilon_dot, te[2].epsilon_dot);
    let t1 = eps1_terms(exps, &eps1);
    let t2 = eps2_terms(exps, &eps2);
    let projected = terms.h * d_hat;
    Vec3::from_fn(|i, _| {
        let u_eps = -(gains.k1[i] * t1[i] + gains.k2[i] * t2[i]) / lam[i];
        let inv_mu = 1.0 / gains.mu[i];
        let reach = triple_sig(1.0 + inv_mu, 1.0 - inv_mu, s[i]);
        let u_s = -(gains.k1[i] + gains.k2[i]) * reach / lam[i];
        -kap[i] / lam[i] + eta_ddot_d[i] - terms.f[i] - projected[i] + u_eps + u_s
    })
}

pub fn fxtppc_control(
    terms: &CompactTerms,
    eta_ddot_d: &Vec3,
    te: &[TransformedError; 3],
    s: &Vec3,
    d_hat: &Vec6,
    gains: &FxtGains,
) -> Result<ControlOutput> {
    let exps = gains.exponents()?;
    solve(
        terms,
        fxtppc_virtual_input(terms, eta_ddot_d, te, s, d_hat, gains, &exps),
    )
}

/// SMC baseline: surface `p = e_dot + c0 e`, smoothed with `tanh`.
pub fn smc_control(
    terms: &CompactTerms,
    eta_ddot_d: &Vec3,
    e: &Vec3,
    e_dot: &Vec3,
    gains: &SmcGains,
) -> Result<ControlOutput> {
    let v = Vec3::from_fn(|i, _| {
        let p = e_dot[i] + gains.c0[i] * e[i];
        -gains.c0[i] * e_dot[i] + eta_ddot_d[i] - terms.f[i] - gains.c1[i] * p - gains.c2[i] * p.tanh()
    });
    solve(terms, v)
}

/// Online `l1` for the PPC baseline: the rate of `1 / lambda` (floored at
/// zero) plus a fixed margin.
pub fn ppc_l1(te: &TransformedError, margin: f64) -> f64 {
    let inv_lambda_rate = -te.lambda_dot / (te.lambda * te.lambda);
    inv_lambda_rate.max(0.0) + margin
}

/// PPC baseline on the transformed errors. Returns the command and the
/// `l1` gains actually used.
pub fn ppc_control(
    terms: &CompactTerms,
    eta_ddot_d: &Vec3,
    te: &[TransformedError; 3],
    d_hat: &Vec6,
    gains: &PpcGains,
) -> Result<(ControlOutput, Vec3)> {
    let projected = terms.h * d_hat;
    let l1 = Vec3::from_fn(|i, _| ppc_l1(&te[i], gains.l1_margin));
    let v = Vec3::from_fn(|i, _| {
        let q = te[i].epsilon_dot + gains.l0[i] * te[i].epsilon;
        -te[i].kappa / te[i].lambda + eta_ddot_d[i] - terms.f[i] - l1[i] * q - gains.l2[i] * q.tanh() - projected[i]
    });
    Ok((solve(terms, v)?, l1))
}

/// Componentwise clamp to the actuator limits, with per-channel flags.
pub fn saturate(raw: &ControlInput, bounds: &InputBounds) -> (ControlInput, [bool; 3]) {
    let v = raw.to_vector();
    let lim = bounds.as_vector();
    let mut out = Vec3::zeros();
    let mut hit = [false; 3];
    for i in 0..3 {
        out[i] = v[i].clamp(-lim[i], lim[i]);
        hit[i] = out[i] != v[i];
    }
    (ControlInput::from_vector(&out), hit)
}

/// Fixed-time settling bounds: per channel `2 mu / min(k1, k2)` and the
/// total including the observer time.
pub fn settling_bound(gains: &FxtGains, observer_time: f64) -> ([f64; 3], f64) {
    let per = [0, 1, 2].map(|i| 2.0 * gains.mu[i] / gains.k1[i].min(gains.k2[i]));
    (per, observer_time + per.iter().sum::<f64>())
}
