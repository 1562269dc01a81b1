//! Evaluation metrics over logged samples.

use serde::{Deserialize, Serialize};

use crate::control::{settling_bound, FxtGains};
use crate::dynamics::{ControlInput, GliderModel, Vec6, VehicleState};
use crate::error::{GliderError, Result};
use crate::sim::log::{EventKind, SimLog};

/// `max |x|` over the samples.
pub fn metric_transient(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(GliderError::TooFewSamples { needed: 1, got: 0 });
    }
    Ok(samples.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Root mean square over uniformly spaced samples; the rectangle-rule form
/// of `sqrt(1/T_f int x^2 dt)` with `T_f = N dT`.
pub fn metric_l2(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(GliderError::TooFewSamples { needed: 1, got: 0 });
    }
    let sum: f64 = samples.iter().map(|v| v * v).sum();
    Ok((sum / samples.len() as f64).sqrt())
}

/// `sqrt(1/N sum_{j>=1} (U_j - U_{j-1})^2)` with `N` the sample count.
pub fn metric_chattering(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(GliderError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let sum: f64 = samples.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((sum / samples.len() as f64).sqrt())
}

/// Lumped disturbance seen by the controller-side model: the generalized
/// force that `modeled` is missing to reproduce the measured `nu_dot`.
pub fn truth_disturbance(modeled: &GliderModel, state: &VehicleState, input: &ControlInput, nu_dot: &Vec6) -> Vec6 {
    modeled.mass_diag().component_mul(nu_dot) - modeled.generalized_force(state, input)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    /// `max |e|`
    pub transient: f64,
    /// RMS tracking error.
    pub tracking: f64,
    /// RMS applied input.
    pub control: f64,
    /// RMS of consecutive input differences.
    pub chattering: f64,
    /// Fraction of samples with a band violation.
    pub violation_fraction: f64,
    /// Same, restricted to `t >= diagnostic_after`.
    pub violation_fraction_late: f64,
    pub saturation_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet<T> {
    pub depth: T,
    pub pitch: T,
    pub heading: T,
}

impl<T: Copy> ChannelSet<T> {
    pub fn from_array(a: [T; 3]) -> Self {
        Self {
            depth: a[0],
            pitch: a[1],
            heading: a[2],
        }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.depth, self.pitch, self.heading]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettlingDiagnostics {
    pub per_channel: [f64; 3],
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: usize,
    /// Log sampling interval `dT`.
    pub sample_interval: f64,
    /// Start of the late window used by `violation_fraction_late`.
    pub diagnostic_after: f64,
    pub channels: ChannelSet<ChannelMetrics>,
    pub damped_fraction: f64,
    pub waypoints_reached: usize,
    /// Time at which the last waypoint was reached.
    pub completion_time: Option<f64>,
    pub settling_bound: SettlingDiagnostics,
}

impl MetricsReport {
    /// Compute every metric from logged samples only, so a re-read CSV log
    /// gives the identical report.
    pub fn from_log(log: &SimLog, gains: &FxtGains, diagnostic_after: f64) -> Result<Self> {
        let n = log.records.len();
        if n < 2 {
            return Err(GliderError::TooFewSamples { needed: 2, got: n });
        }
        let late: Vec<_> = log.records.iter().filter(|r| r.t >= diagnostic_after).collect();
        let mut channels = [None; 3];
        for (i, slot) in channels.iter_mut().enumerate() {
            let e: Vec<f64> = log.records.iter().map(|r| r.e[i]).collect();
            let u: Vec<f64> = log.records.iter().map(|r| r.u[i]).collect();
            let count = |it: &mut dyn Iterator<Item = bool>| it.filter(|&b| b).count() as f64;
            let viol = count(&mut log.records.iter().map(|r| r.violated[i])) / n as f64;
            let viol_late = if late.is_empty() {
                0.0
            } else {
                count(&mut late.iter().map(|r| r.violated[i])) / late.len() as f64
            };
            let sat = count(&mut log.records.iter().map(|r| r.saturated[i])) / n as f64;
            *slot = Some(ChannelMetrics {
                transient: metric_transient(&e)?,
                tracking: metric_l2(&e)?,
                control: metric_l2(&u)?,
                chattering: metric_chattering(&u)?,
                violation_fraction: viol,
                violation_fraction_late: viol_late,
                saturation_fraction: sat,
            });
        }
        let (per_channel, total) = settling_bound(gains, 0.0);
        Ok(Self {
            samples: n,
            sample_interval: log.sample_interval().unwrap_or(0.0),
            diagnostic_after,
            channels: ChannelSet::from_array(channels.map(|c| c.expect("filled above"))),
            damped_fraction: log.records.iter().filter(|r| r.damped).count() as f64 / n as f64,
            waypoints_reached: log.events_of(EventKind::WaypointSwitch).count(),
            completion_time: log.events_of(EventKind::PathComplete).map(|e| e.t).next(),
            settling_bound: SettlingDiagnostics { per_channel, total },
        })
    }
}
