//! Report-only checks of the gain selection rules.

use serde::Serialize;

use crate::envelope::{sech, PerformanceSpec};
use crate::observer::{gain_set_valid, ObserverGains};
use crate::sim::config::ScenarioConfig;
use crate::sim::log::CHANNELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainRule {
    /// `(iota1, iota2)` inside the fixed-time observer gain set.
    ObserverGainSet,
    /// `k1 < 3/4 k2^2` for the sliding surface.
    SlidingGainRatio,
    /// `sech(P0) > P_inf` for the hyperbolic envelope.
    EnvelopeStart,
}

impl GainRule {
    pub fn name(self) -> &'static str {
        match self {
            GainRule::ObserverGainSet => "observer-gain-set",
            GainRule::SlidingGainRatio => "sliding-gain-ratio",
            GainRule::EnvelopeStart => "envelope-start",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleCheck {
    pub rule: GainRule,
    /// Channel the rule was evaluated on.
    pub subject: String,
    pub passed: bool,
    pub detail: String,
}

pub fn sliding_gain_ratio_holds(k1: f64, k2: f64) -> bool {
    k1 < 0.75 * k2 * k2
}

pub fn check_observer(gains: &ObserverGains) -> Vec<RuleCheck> {
    (0..6)
        .map(|i| {
            let (a, b, d) = (gains.iota1[i], gains.iota2[i], gains.d_dot_max[i]);
            RuleCheck {
                rule: GainRule::ObserverGainSet,
                subject: format!("observer[{}]", i + 1),
                passed: gain_set_valid(a, b, d),
                detail: format!("iota1={a}, iota2={b}, d_dot_max={d:.3e}"),
            }
        })
        .collect()
}

pub fn check_sliding(k1: &[f64; 3], k2: &[f64; 3]) -> Vec<RuleCheck> {
    (0..3)
        .map(|i| RuleCheck {
            rule: GainRule::SlidingGainRatio,
            subject: CHANNELS[i].to_string(),
            passed: sliding_gain_ratio_holds(k1[i], k2[i]),
            detail: format!("k1={} vs 3/4 k2^2={:.4e}", k1[i], 0.75 * k2[i] * k2[i]),
        })
        .collect()
}

pub fn check_envelopes(specs: &[PerformanceSpec; 3]) -> Vec<RuleCheck> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| RuleCheck {
            rule: GainRule::EnvelopeStart,
            subject: CHANNELS[i].to_string(),
            passed: s.sech_constraint_holds(),
            detail: format!("sech(P0)={:.6} vs P_inf={}", sech(s.p0), s.p_inf),
        })
        .collect()
}

/// Every rule over every channel of a configuration.
pub fn check_gains(cfg: &ScenarioConfig) -> Vec<RuleCheck> {
    let mut out = check_observer(&cfg.observer);
    out.extend(check_sliding(&cfg.fxtppc.k1, &cfg.fxtppc.k2));
    out.extend(check_envelopes(&cfg.envelope.as_array()));
    out
}
