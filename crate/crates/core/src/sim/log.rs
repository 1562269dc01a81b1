//! Per-step simulation records, discrete events, and the CSV log format.
//!
//! Column order of the CSV log (one row per logged step):
//!
//! | columns | meaning |
//! |---|---|
//! | `t` | time, s |
//! | `x y z phi theta psi` | pose |
//! | `u v w p q r` | body velocity |
//! | `z_d theta_d psi_d` | references |
//! | `e_z e_theta e_psi` | tracking errors, heading wrapped |
//! | `eps_z eps_theta eps_psi` | transformed errors |
//! | `p_z p_theta p_psi` | envelope values |
//! | `mb_raw rp1_raw gamma_raw` | unsaturated command |
//! | `mb rp1 gamma` | applied command |
//! | `d_1 .. d_6` | true lumped disturbance |
//! | `dhat_1 .. dhat_6` | disturbance estimate |
//! | `viol_z viol_theta viol_psi` | band violation flags (0/1) |
//! | `sat_mb sat_rp1 sat_gamma` | saturation flags (0/1) |
//! | `damped` | damped inverse used (0/1) |
//! | `events` | `;`-separated `tag[:channel]@time` entries raised since this row |

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{GliderError, Result};

pub const CHANNELS: [&str; 3] = ["depth", "pitch", "heading"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ReferenceSwitch,
    WaypointSwitch,
    PathComplete,
    EnvelopeReset,
    ViolationStart,
    ViolationEnd,
    SaturationStart,
    SaturationEnd,
    DampedInverseStart,
    DampedInverseEnd,
}

impl EventKind {
    const ALL: [EventKind; 10] = [
        EventKind::ReferenceSwitch,
        EventKind::WaypointSwitch,
        EventKind::PathComplete,
        EventKind::EnvelopeReset,
        EventKind::ViolationStart,
        EventKind::ViolationEnd,
        EventKind::SaturationStart,
        EventKind::SaturationEnd,
        EventKind::DampedInverseStart,
        EventKind::DampedInverseEnd,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EventKind::ReferenceSwitch => "reference_switch",
            EventKind::WaypointSwitch => "waypoint_switch",
            EventKind::PathComplete => "path_complete",
            EventKind::EnvelopeReset => "envelope_reset",
            EventKind::ViolationStart => "violation_start",
            EventKind::ViolationEnd => "violation_end",
            EventKind::SaturationStart => "saturation_start",
            EventKind::SaturationEnd => "saturation_end",
            EventKind::DampedInverseStart => "damped_inverse_start",
            EventKind::DampedInverseEnd => "damped_inverse_end",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

/// A discrete event. `channel` indexes depth/pitch/heading (or the matching
/// actuator) for per-channel events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    pub kind: EventKind,
    pub channel: Option<usize>,
}

impl SimEvent {
    fn encode(&self) -> String {
        match self.channel {
            Some(c) => format!("{}:{}@{}", self.kind.tag(), c, self.t),
            None => format!("{}@{}", self.kind.tag(), self.t),
        }
    }

    fn decode(token: &str) -> Result<Self> {
        let (token, t) = token
            .rsplit_once('@')
            .ok_or_else(|| GliderError::Config(format!("event `{token}` has no time")))?;
        let t = t
            .parse::<f64>()
            .map_err(|_| GliderError::Config(format!("bad event time in `{token}`")))?;
        let (tag, channel) = match token.split_once(':') {
            Some((tag, c)) => {
                let c = c
                    .parse::<usize>()
                    .map_err(|_| GliderError::Config(format!("bad event channel in `{token}`")))?;
                (tag, Some(c))
            }
            None => (token, None),
        };
        let kind = EventKind::from_tag(tag).ok_or_else(|| GliderError::Config(format!("unknown event `{tag}`")))?;
        Ok(SimEvent { t, kind, channel })
    }
}

/// One logged step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimRecord {
    pub t: f64,
    pub pose: [f64; 6],
    pub nu: [f64; 6],
    pub eta_d: [f64; 3],
    pub e: [f64; 3],
    pub epsilon: [f64; 3],
    pub envelope: [f64; 3],
    pub u_raw: [f64; 3],
    pub u: [f64; 3],
    pub d_truth: [f64; 6],
    pub d_hat: [f64; 6],
    pub violated: [bool; 3],
    pub saturated: [bool; 3],
    pub damped: bool,
}

/// Time series of records plus the event list. In the CSV each event is
/// attached to the last row at or before its time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub records: Vec<SimRecord>,
    pub events: Vec<SimEvent>,
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = vec!["t".into()];
    let groups: [(&[&str], &str); 12] = [
        (&["x", "y", "z", "phi", "theta", "psi"], ""),
        (&["u", "v", "w", "p", "q", "r"], ""),
        (&["z_d", "theta_d", "psi_d"], ""),
        (&["e_z", "e_theta", "e_psi"], ""),
        (&["eps_z", "eps_theta", "eps_psi"], ""),
        (&["p_z", "p_theta", "p_psi"], ""),
        (&["mb", "rp1", "gamma"], "_raw"),
        (&["mb", "rp1", "gamma"], ""),
        (&["d_1", "d_2", "d_3", "d_4", "d_5", "d_6"], ""),
        (&["dhat_1", "dhat_2", "dhat_3", "dhat_4", "dhat_5", "dhat_6"], ""),
        (&["viol_z", "viol_theta", "viol_psi"], ""),
        (&["sat_mb", "sat_rp1", "sat_gamma"], ""),
    ];
    for (names, suffix) in groups {
        h.extend(names.iter().map(|n| format!("{n}{suffix}")));
    }
    h.push("damped".into());
    h.push("events".into());
    h
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

impl SimLog {
    /// Sampling interval between consecutive records.
    pub fn sample_interval(&self) -> Option<f64> {
        match self.records.as_slice() {
            [a, b, ..] => Some(b.t - a.t),
            _ => None,
        }
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &SimEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Write the CSV log. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(csv_header())?;
        let mut next_event = 0;
        for (i, r) in self.records.iter().enumerate() {
            let upper = self.records.get(i + 1).map(|n| n.t).unwrap_or(f64::INFINITY);
            let mut tags = Vec::new();
            while next_event < self.events.len() && self.events[next_event].t < upper {
                tags.push(self.events[next_event].encode());
                next_event += 1;
            }
            let mut row: Vec<String> = Vec::with_capacity(57);
            row.push(r.t.to_string());
            let floats = r
                .pose
                .iter()
                .chain(&r.nu)
                .chain(&r.eta_d)
                .chain(&r.e)
                .chain(&r.epsilon)
                .chain(&r.envelope)
                .chain(&r.u_raw)
                .chain(&r.u)
                .chain(&r.d_truth)
                .chain(&r.d_hat);
            row.extend(floats.map(|v| v.to_string()));
            row.extend(r.violated.iter().chain(&r.saturated).map(|&b| flag(b).to_string()));
            row.push(flag(r.damped).to_string());
            row.push(tags.join(";"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a log written by [`SimLog::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(reader);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != csv_header() {
            return Err(GliderError::Config(
                "log header does not match the expected column order".into(),
            ));
        }
        let mut log = SimLog::default();
        for row in rd.records() {
            let row = row?;
            let num = |i: usize| -> Result<f64> {
                row[i]
                    .parse::<f64>()
                    .map_err(|_| GliderError::Config(format!("bad number `{}` in column {}", &row[i], header[i])))
            };
            let bit = |i: usize| -> Result<bool> {
                match &row[i] {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(GliderError::Config(format!(
                        "bad flag `{other}` in column {}",
                        header[i]
                    ))),
                }
            };
            let mut col = 1;
            let mut take = |n: usize, out: &mut [f64]| -> Result<()> {
                for slot in out.iter_mut().take(n) {
                    *slot = num(col)?;
                    col += 1;
                }
                Ok(())
            };
            let mut r = SimRecord {
                t: num(0)?,
                ..Default::default()
            };
            take(6, &mut r.pose)?;
            take(6, &mut r.nu)?;
            take(3, &mut r.eta_d)?;
            take(3, &mut r.e)?;
            take(3, &mut r.epsilon)?;
            take(3, &mut r.envelope)?;
            take(3, &mut r.u_raw)?;
            take(3, &mut r.u)?;
            take(6, &mut r.d_truth)?;
            take(6, &mut r.d_hat)?;
            let base = 1 + 42;
            for i in 0..3 {
                r.violated[i] = bit(base + i)?;
                r.saturated[i] = bit(base + 3 + i)?;
            }
            r.damped = bit(base + 6)?;
            let tags = &row[base + 7];
            if !tags.is_empty() {
                for token in tags.split(';') {
                    log.events.push(SimEvent::decode(token)?);
                }
            }
            log.records.push(r);
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_width() {
        assert_eq!(csv_header().len(), 1 + 42 + 6 + 1 + 1);
    }

    #[test]
    fn csv_round_trip() {
        let mut log = SimLog::default();
        for k in 0..4 {
            let mut r = SimRecord {
                t: k as f64 * 0.1,
                ..Default::default()
            };
            r.e = [0.1 * k as f64, 1.0 / 3.0, -2e-17];
            r.u = [f64::MIN_POSITIVE, 0.4, -0.06];
            r.violated[1] = k == 2;
            r.damped = k == 0;
            log.records.push(r);
        }
        log.events.push(SimEvent {
            t: 0.1,
            kind: EventKind::ReferenceSwitch,
            channel: None,
        });
        log.events.push(SimEvent {
            t: 0.25,
            kind: EventKind::ViolationStart,
            channel: Some(1),
        });
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = SimLog::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, log);
    }
}
