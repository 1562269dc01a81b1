//! Plain-text comparison table across controllers.

use std::fmt::Write;

use crate::sim::log::CHANNELS;
use crate::sim::{ControllerKind, MetricsReport};

const GROUPS: [&str; 4] = ["transient", "tracking", "control", "chattering"];

fn value(m: &MetricsReport, group: usize, channel: usize) -> f64 {
    let c = m.channels.as_array()[channel];
    match group {
        0 => c.transient,
        1 => c.tracking,
        2 => c.control,
        _ => c.chattering,
    }
}

/// One row per controller, one column per metric and channel. The
/// smallest value of each column is marked with `*`.
pub fn comparison_table(runs: &[(ControllerKind, MetricsReport)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<14}", "metric");
    for (name, _) in runs {
        let _ = write!(out, "{:>14}", name.name());
    }
    out.push('\n');
    for (g, group) in GROUPS.iter().enumerate() {
        for (c, channel) in CHANNELS.iter().enumerate() {
            let vals: Vec<f64> = runs.iter().map(|(_, m)| value(m, g, c)).collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let _ = write!(out, "{:<14}", format!("{group}/{}", &channel[..1]));
            for v in &vals {
                let mark = if runs.len() > 1 && *v == min { "*" } else { " " };
                let _ = write!(out, "{:>13.4e}{mark}", v);
            }
            out.push('\n');
        }
    }
    out
}
