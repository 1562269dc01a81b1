//! Sampled envelope curves for external plotting.

use std::io::Write;

use crate::envelope::{ftpf_exp_classical, ftpf_ppc_baseline, ftpf_sech, PerformanceSpec};
use crate::error::{GliderError, Result};
use crate::sim::config::EnvelopeSet;
use crate::sim::log::CHANNELS;

pub const DEFAULT_FTPF_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtpfSample {
    pub channel: usize,
    pub t: f64,
    pub sech: f64,
    pub classical: f64,
    pub ppc: f64,
}

/// `samples` evenly spaced points on `[0, T]` for one spec.
pub fn sample_envelope(channel: usize, spec: &PerformanceSpec, samples: usize) -> Result<Vec<FtpfSample>> {
    if samples < 2 {
        return Err(GliderError::TooFewSamples {
            needed: 2,
            got: samples,
        });
    }
    let step = spec.settle_time / (samples - 1) as f64;
    Ok((0..samples)
        .map(|k| {
            let t = if k + 1 == samples {
                spec.settle_time
            } else {
                k as f64 * step
            };
            FtpfSample {
                channel,
                t,
                sech: ftpf_sech(t, spec).p,
                classical: ftpf_exp_classical(t, spec),
                ppc: ftpf_ppc_baseline(t, spec).p,
            }
        })
        .collect())
}

pub fn sample_envelopes(set: &EnvelopeSet, samples: usize) -> Result<Vec<FtpfSample>> {
    let mut out = Vec::with_capacity(3 * samples);
    for (i, spec) in set.as_array().iter().enumerate() {
        out.extend(sample_envelope(i, spec, samples)?);
    }
    Ok(out)
}

/// CSV with columns `channel,t,sech,classical,ppc`.
pub fn write_ftpf_csv<W: Write>(rows: &[FtpfSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["channel", "t", "sech", "classical", "ppc"])?;
    for r in rows {
        w.write_record([
            CHANNELS[r.channel].to_string(),
            r.t.to_string(),
            r.sech.to_string(),
            r.classical.to_string(),
            r.ppc.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
