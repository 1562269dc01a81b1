//! Independent scenario runs fanned out over a thread pool, with a
//! sequential path used when the `parallel` feature is off.

use crate::error::Result;
use crate::sim::{simulate, ControllerKind, ScenarioConfig, Simulation};

/// Run every configuration on the calling thread.
pub fn run_batch_sequential(configs: &[ScenarioConfig]) -> Vec<Result<Simulation>> {
    configs.iter().map(simulate).collect()
}

/// Run every configuration; results keep the input order.
#[cfg(feature = "parallel")]
pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<Result<Simulation>> {
    use rayon::prelude::*;
    configs.par_iter().map(simulate).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<Result<Simulation>> {
    run_batch_sequential(configs)
}

/// One configuration per controller, all sharing `base`.
pub fn controller_variants(base: &ScenarioConfig, controllers: &[ControllerKind]) -> Vec<ScenarioConfig> {
    controllers.iter().map(|&c| base.clone().with_controller(c)).collect()
}

pub fn run_controllers(base: &ScenarioConfig, controllers: &[ControllerKind]) -> Vec<Result<Simulation>> {
    run_batch(&controller_variants(base, controllers))
}
