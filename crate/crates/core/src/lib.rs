//! Underwater glider attitude and path-following simulation: vehicle
//! dynamics, finite-time performance envelopes, a fixed-time disturbance
//! observer, three controllers and a fixed-step closed-loop engine.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod control;
pub mod dynamics;
pub mod envelope;
pub mod error;
pub mod export;
pub mod gains;
pub mod guidance;
pub mod observer;
pub mod report;
pub mod sig;
pub mod sim;

pub use error::{GliderError, Result};
