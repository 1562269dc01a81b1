//! Closed-loop simulation: configuration, integration, logging and metrics.

pub mod config;
pub mod engine;
pub mod integrator;
pub mod log;
pub mod metrics;

pub use config::{ControllerKind, ScenarioConfig, ScenarioKind};
pub use engine::{run_scenario, simulate, Abort, RunOutput, Simulation};
pub use log::{EventKind, SimEvent, SimLog, SimRecord};
pub use metrics::{metric_chattering, metric_l2, metric_transient, truth_disturbance, MetricsReport};
