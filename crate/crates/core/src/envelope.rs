//! Finite-time performance functions and the logarithmic error
//! transformation built on them.

use serde::{Deserialize, Serialize};

use crate::error::{GliderError, Result};

/// Below this distance to the preset time the floor branch is used.
pub const BRANCH_GUARD: f64 = 1e-6;
/// Margin kept between a clamped error ratio and the band edge.
pub const BAND_MARGIN: f64 = 1e-6;

/// Shape and timing of one channel's performance function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceSpec {
    pub p0: f64,
    pub p_inf: f64,
    /// Preset settling time `T`.
    pub settle_time: f64,
    #[serde(default = "one")]
    pub delta_l: f64,
    #[serde(default = "one")]
    pub delta_r: f64,
}

fn one() -> f64 {
    1.0
}

impl PerformanceSpec {
    pub fn new(p0: f64, p_inf: f64, settle_time: f64) -> Self {
        Self {
            p0,
            p_inf,
            settle_time,
            delta_l: 1.0,
            delta_r: 1.0,
        }
    }

    /// `sech(P0) > P_inf`, required by the hyperbolic envelope.
    pub fn sech_constraint_holds(&self) -> bool {
        sech(self.p0) > self.p_inf
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(GliderError::InvalidParameter { name, reason });
        if !(self.p0 > 0.0) {
            return bad("p0", format!("must be positive, got {}", self.p0));
        }
        if !(self.p_inf > 0.0) {
            return bad("p_inf", format!("must be positive, got {}", self.p_inf));
        }
        if !(self.settle_time > 0.0) {
            return bad("settle_time", format!("must be positive, got {}", self.settle_time));
        }
        for (name, d) in [("delta_l", self.delta_l), ("delta_r", self.delta_r)] {
            if !(d > 0.0 && d <= 1.0) {
                return bad(name, format!("must lie in (0, 1], got {d}"));
            }
        }
        if !self.sech_constraint_holds() {
            return bad(
                "p0",
                format!("sech(p0) = {} must exceed p_inf = {}", sech(self.p0), self.p_inf),
            );
        }
        Ok(())
    }
}

/// Envelope value with its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnvelopeValue {
    pub p: f64,
    pub p_dot: f64,
    pub p_ddot: f64,
}

pub fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `scale * sech(rate * T / (T - t)) + P_inf` with analytic derivatives.
fn scaled_sech_envelope(t: f64, scale: f64, rate: f64, spec: &PerformanceSpec) -> EnvelopeValue {
    let big_t = spec.settle_time;
    let remaining = big_t - t;
    if remaining < BRANCH_GUARD {
        return EnvelopeValue {
            p: spec.p_inf,
            p_dot: 0.0,
            p_ddot: 0.0,
        };
    }
    let k = rate * big_t / remaining;
    let k_dot = rate * big_t / (remaining * remaining);
    let k_ddot = 2.0 * k_dot / remaining;
    let s = sech(k);
    let th = k.tanh();
    EnvelopeValue {
        p: scale * s + spec.p_inf,
        p_dot: -scale * s * th * k_dot,
        p_ddot: scale * (s * (th * th - s * s) * k_dot * k_dot - s * th * k_ddot),
    }
}

/// Hyperbolic-secant envelope used by the proposed controller.
/// `t` is the local time since the last reset.
pub fn ftpf_sech(t: f64, spec: &PerformanceSpec) -> EnvelopeValue {
    scaled_sech_envelope(t.max(0.0), 1.0, sech(spec.p0), spec)
}

/// Envelope of the PPC baseline, `exp(K) / (1 + exp(K)^2) + P_inf` with
/// `K = P0 T / (T - t)`, evaluated as `sech(K) / 2` to avoid overflow.
pub fn ftpf_ppc_baseline(t: f64, spec: &PerformanceSpec) -> EnvelopeValue {
    scaled_sech_envelope(t.max(0.0), 0.5, spec.p0, spec)
}

/// Classical exponential finite-time envelope.
pub fn ftpf_exp_classical(t: f64, spec: &PerformanceSpec) -> f64 {
    let big_t = spec.settle_time;
    if big_t - t < BRANCH_GUARD {
        return spec.p_inf;
    }
    (spec.p0 - t / big_t) * (1.0 - big_t / (big_t - t)).exp() + spec.p_inf
}

/// Time derivative of [`ftpf_exp_classical`].
pub fn ftpf_exp_classical_dot(t: f64, spec: &PerformanceSpec) -> f64 {
    let big_t = spec.settle_time;
    let remaining = big_t - t;
    if remaining < BRANCH_GUARD {
        return 0.0;
    }
    let ex = (1.0 - big_t / remaining).exp();
    let lin = spec.p0 - t / big_t;
    ex * (-1.0 / big_t - lin * big_t / (remaining * remaining))
}

/// Which performance-function family a controller uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    Sech,
    PpcBaseline,
}

impl EnvelopeKind {
    pub fn evaluate(self, t: f64, spec: &PerformanceSpec) -> EnvelopeValue {
        match self {
            EnvelopeKind::Sech => ftpf_sech(t, spec),
            EnvelopeKind::PpcBaseline => ftpf_ppc_baseline(t, spec),
        }
    }
}

/// A performance function together with its reset clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub spec: PerformanceSpec,
    pub kind: EnvelopeKind,
    /// Time of the last reset.
    pub reset_time: f64,
}

impl Envelope {
    pub fn new(spec: PerformanceSpec, kind: EnvelopeKind) -> Self {
        Self {
            spec,
            kind,
            reset_time: 0.0,
        }
    }

    pub fn local_time(&self, t: f64) -> f64 {
        (t - self.reset_time).max(0.0)
    }

    pub fn at(&self, t: f64) -> EnvelopeValue {
        self.kind.evaluate(self.local_time(t), &self.spec)
    }
}

/// Restart the envelope clock at `t_event`.
pub fn reset_envelope(envelope: &Envelope, t_event: f64) -> Envelope {
    Envelope {
        reset_time: t_event.max(envelope.reset_time),
        ..*envelope
    }
}

/// Local time of a periodic reset schedule, `t mod period`.
pub fn periodic_local_time(t: f64, period: f64) -> f64 {
    t.rem_euclid(period)
}

/// Transformed error and the auxiliary terms of its dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformedError {
    pub epsilon: f64,
    pub epsilon_dot: f64,
    pub lambda: f64,
    pub lambda_dot: f64,
    pub kappa: f64,
    /// Set when the raw error left the open band and was clamped.
    pub violated: bool,
}

/// Error ratio `e / P` clamped into the open band.
fn band_ratio(e: f64, p: f64, delta_l: f64, delta_r: f64) -> (f64, bool) {
    let r = e / p;
    let lo = -delta_l + BAND_MARGIN;
    let hi = delta_r - BAND_MARGIN;
    if r <= lo {
        (lo, true)
    } else if r >= hi {
        (hi, true)
    } else {
        (r, false)
    }
}

/// `(1/2) ln((dL + e/P) / (dR - e/P))`, clamped at the band edges. The
/// flag reports a band violation.
pub fn transform_error(e: f64, p: f64, delta_l: f64, delta_r: f64) -> (f64, bool) {
    let (r, violated) = band_ratio(e, p, delta_l, delta_r);
    (0.5 * ((delta_l + r) / (delta_r - r)).ln(), violated)
}

/// Inverse map `S(eps)`: `e = P * S(eps)`.
pub fn inverse_transform(epsilon: f64, delta_l: f64, delta_r: f64) -> f64 {
    let (ep, em) = (epsilon.exp(), (-epsilon).exp());
    (delta_r * ep - delta_l * em) / (ep + em)
}

/// Transformed error with its derivative, `lambda`, `lambda_dot` and
/// `kappa`, such that `eps_ddot = kappa + lambda * e_ddot`.
pub fn transform_derivatives(e: f64, e_dot: f64, env: &EnvelopeValue, delta_l: f64, delta_r: f64) -> TransformedError {
    let EnvelopeValue { p, p_dot, p_ddot } = *env;
    let (r, violated) = band_ratio(e, p, delta_l, delta_r);
    let e = r * p;
    // While clamped the ratio is frozen, so the error seen by the
    // transform moves with the envelope only.
    let e_dot = if violated { r * p_dot } else { e_dot };
    let lo = delta_l + r;
    let hi = delta_r - r;
    let epsilon = 0.5 * (lo / hi).ln();
    let spread = 1.0 / lo + 1.0 / hi;
    let spread_dr = -1.0 / (lo * lo) + 1.0 / (hi * hi);
    let lambda = spread / (2.0 * p);
    let cross = e_dot * p - e * p_dot;
    let ratio_dot = cross / (p * p);
    let lambda_dot = -p_dot * spread / (2.0 * p * p) + spread_dr * ratio_dot / (2.0 * p);
    let epsilon_dot = lambda * cross / p;
    let kappa = lambda_dot * cross / p + lambda * (-e_dot * p_dot * p - e * p_ddot * p + e * p_dot * p_dot) / (p * p);
    TransformedError {
        epsilon,
        epsilon_dot,
        lambda,
        lambda_dot,
        kappa,
        violated,
    }
}
