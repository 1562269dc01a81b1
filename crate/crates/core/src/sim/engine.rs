//! Fixed-step closed loop for both scenarios.

use nalgebra::SVector;

use crate::control::{
    fxtppc_control, ppc_control, saturate, smc_control, ControlOutput, Exponents, FxtGains, SlidingState,
};
use crate::dynamics::{
    attack_angle, compact_terms, env_disturbance, modeled_params, pose_dot, rotation_map, ControlInput, GliderModel,
    Vec3, Vec6, VehicleState, IDX_PSI, IDX_X, IDX_Y,
};
use crate::envelope::{
    reset_envelope, transform_derivatives, Envelope, EnvelopeKind, PerformanceSpec, TransformedError,
};
use crate::error::{GliderError, Result};
use crate::guidance::{
    case1_reference, cross_track, cross_track_rate, ilos_heading_rate, ilos_step, path_azimuth, schedule_block,
    waypoint_update, wrap_angle, IlosGains, IlosState, WaypointPlan, SCHEDULE_BLOCK,
};
use crate::observer::{observer_rates, ObserverState};
use crate::sim::config::{ControllerKind, ScenarioConfig, ScenarioKind};
use crate::sim::integrator::integrate_step;
use crate::sim::log::{EventKind, SimEvent, SimLog, SimRecord};
use crate::sim::metrics::{truth_disturbance, MetricsReport};

type Joint = SVector<f64, 24>;

fn pack(v: &VehicleState, o: &ObserverState) -> Joint {
    let mut x = Joint::zeros();
    x.fixed_rows_mut::<6>(0).copy_from(&v.pose);
    x.fixed_rows_mut::<6>(6).copy_from(&v.nu);
    x.fixed_rows_mut::<6>(12).copy_from(&o.varpi);
    x.fixed_rows_mut::<6>(18).copy_from(&o.varphi_integral);
    x
}

fn unpack(x: &Joint) -> (VehicleState, ObserverState) {
    (
        VehicleState::new(x.fixed_rows::<6>(0).into_owned(), x.fixed_rows::<6>(6).into_owned()),
        ObserverState {
            varpi: x.fixed_rows::<6>(12).into_owned(),
            varphi_integral: x.fixed_rows::<6>(18).into_owned(),
        },
    )
}

/// Tracks on/off episodes of a per-step flag and emits start/end events.
#[derive(Debug, Clone, Copy, Default)]
struct Episode {
    active: bool,
}

impl Episode {
    fn update(
        &mut self,
        on: bool,
        t: f64,
        kinds: (EventKind, EventKind),
        channel: Option<usize>,
        out: &mut Vec<SimEvent>,
    ) {
        if on != self.active {
            let kind = if on { kinds.0 } else { kinds.1 };
            out.push(SimEvent { t, kind, channel });
            self.active = on;
        }
    }
}

/// Result of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub controller: ControllerKind,
    pub log: SimLog,
    pub metrics: MetricsReport,
}

/// Why and when a run stopped before its horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Abort {
    pub t: f64,
    pub error: GliderError,
}

/// A run that may have stopped early. `log` holds every step taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub controller: ControllerKind,
    pub log: SimLog,
    pub abort: Option<Abort>,
}

impl Simulation {
    /// Metrics for a completed run; an aborted run yields its error.
    pub fn finish(self, gains: &FxtGains) -> Result<RunOutput> {
        if let Some(abort) = self.abort {
            return Err(abort.error);
        }
        let metrics = MetricsReport::from_log(&self.log, gains, SCHEDULE_BLOCK)?;
        Ok(RunOutput {
            controller: self.controller,
            log: self.log,
            metrics,
        })
    }
}

/// Right-hand side of the joint plant/observer system with the input held.
fn joint_rhs(
    cfg: &ScenarioConfig,
    plant: &GliderModel,
    model: &GliderModel,
    input: &ControlInput,
    t: f64,
    x: &Joint,
) -> Result<Joint> {
    let (vehicle, obs) = unpack(x);
    let tau = if cfg.scenario.environment {
        env_disturbance(t)
    } else {
        Vec6::zeros()
    };
    let pd = pose_dot(&vehicle.pose, &vehicle.nu)?;
    let nd = plant.nu_dot(&vehicle, input, &tau);
    let (wd, phi) = observer_rates(&cfg.observer, model, &vehicle, input, &obs);
    let mut out = Joint::zeros();
    out.fixed_rows_mut::<6>(0).copy_from(&pd);
    out.fixed_rows_mut::<6>(6).copy_from(&nd);
    out.fixed_rows_mut::<6>(12).copy_from(&wd);
    out.fixed_rows_mut::<6>(18).copy_from(&phi);
    Ok(out)
}

/// Mutable state of one run.
struct Runner<'a> {
    cfg: &'a ScenarioConfig,
    plant: GliderModel,
    model: GliderModel,
    exps: [Exponents; 3],
    feed_estimate: bool,
    specs: [PerformanceSpec; 3],
    envelopes: [Envelope; 3],
    x: Joint,
    sliding: SlidingState,
    ilos: IlosState,
    ilos_gains: IlosGains,
    plan: WaypointPlan,
    gamma_prev: f64,
    last_psi_d: f64,
    block: usize,
    violation: [Episode; 3],
    saturation: [Episode; 3],
    damped: Episode,
    log: SimLog,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        let kind = match cfg.scenario.controller {
            ControllerKind::Ppc => EnvelopeKind::PpcBaseline,
            _ => EnvelopeKind::Sech,
        };
        let specs = cfg.envelope.as_array();
        let init = VehicleState::new(Vec6::from(cfg.initial.pose), Vec6::from(cfg.initial.nu));
        let plan = WaypointPlan::new(
            cfg.guidance.waypoints.clone(),
            cfg.guidance.radius,
            [cfg.initial.pose[IDX_X], cfg.initial.pose[IDX_Y]],
        )?;
        Ok(Self {
            cfg,
            plant: GliderModel::actual(cfg.glider),
            model: modeled_params(&cfg.glider, &cfg.uncertainty),
            exps: cfg.fxtppc.exponents()?,
            feed_estimate: cfg.scenario.observer && cfg.scenario.controller.uses_observer(),
            specs,
            envelopes: specs.map(|s| Envelope::new(s, kind)),
            x: pack(&init, &ObserverState::at_rest(&init.nu)),
            sliding: SlidingState::default(),
            ilos: IlosState::default(),
            ilos_gains: cfg.guidance.ilos_gains(),
            plan,
            gamma_prev: 0.0,
            last_psi_d: cfg.initial.pose[IDX_PSI],
            block: schedule_block(0.0),
            violation: [Episode::default(); 3],
            saturation: [Episode::default(); 3],
            damped: Episode::default(),
            log: SimLog {
                records: Vec::with_capacity(cfg.steps() / cfg.scenario.log_decimation + 1),
                events: Vec::new(),
            },
        })
    }

    /// Heading reference and its rate. Advances the waypoint plan and the
    /// integral state; the flag asks for an envelope reset.
    fn heading_reference(
        &mut self,
        t: f64,
        vehicle: &VehicleState,
        scheduled: f64,
        events: &mut Vec<SimEvent>,
    ) -> Result<(f64, f64, bool)> {
        let cfg = self.cfg;
        if cfg.scenario.kind == ScenarioKind::AttitudeSwitching {
            return Ok((scheduled, 0.0, false));
        }
        let pos = [vehicle.pose[IDX_X], vehicle.pose[IDX_Y]];
        let mut reset = false;
        if !self.plan.is_complete() {
            let (next, switched) = waypoint_update(&self.plan, pos);
            if switched {
                events.push(SimEvent {
                    t,
                    kind: EventKind::WaypointSwitch,
                    channel: None,
                });
                if next.is_complete() {
                    events.push(SimEvent {
                        t,
                        kind: EventKind::PathComplete,
                        channel: None,
                    });
                } else {
                    reset = true;
                    if cfg.guidance.reset_integral_on_switch {
                        self.ilos = IlosState::default();
                    }
                }
            }
            self.plan = next;
        }
        if self.plan.is_complete() {
            // Hold the last commanded heading once the path is done.
            return Ok((self.last_psi_d, 0.0, reset));
        }
        let (from, to) = self.plan.leg();
        let chi = path_azimuth(from, to)?;
        let y_e = cross_track(pos, from, to)?;
        let vel = pose_dot(&vehicle.pose, &vehicle.nu)?;
        let y_e_dot = cross_track_rate([vel[IDX_X], vel[IDX_Y]], from, to)?;
        let rate = ilos_heading_rate(&self.ilos, &self.ilos_gains, y_e, y_e_dot);
        let (rel, next) = ilos_step(&self.ilos, &self.ilos_gains, y_e, cfg.scenario.dt);
        self.ilos = next;
        Ok((wrap_angle(chi + rel), rate, reset))
    }

    fn step(&mut self, k: usize, t: f64) -> Result<()> {
        let cfg = self.cfg;
        let dt = cfg.scenario.dt;
        let (vehicle, obs) = unpack(&self.x);
        if !vehicle.is_finite() {
            return Err(GliderError::NonFiniteState {
                t,
                what: "vehicle state".into(),
            });
        }
        let mut events = Vec::new();

        // References and reset events.
        let r = case1_reference(t);
        let mut reset = false;
        let b = schedule_block(t);
        if b != self.block {
            self.block = b;
            events.push(SimEvent {
                t,
                kind: EventKind::ReferenceSwitch,
                channel: None,
            });
            reset = true;
        }
        let (psi_d, psi_dot_d, waypoint_reset) = self.heading_reference(t, &vehicle, r.psi_d, &mut events)?;
        self.last_psi_d = psi_d;
        if reset || waypoint_reset {
            for (i, env) in self.envelopes.iter_mut().enumerate() {
                *env = reset_envelope(env, t);
                events.push(SimEvent {
                    t,
                    kind: EventKind::EnvelopeReset,
                    channel: Some(i),
                });
            }
        }

        let lim = cfg.guidance.attack_angle_limit;
        let alpha = attack_angle(&vehicle.nu).clamp(-lim, lim);
        let eta_d = Vec3::new(r.z_d, r.xi_d + alpha, psi_d);
        let eta_dot_d = Vec3::new(r.z_dot_d, 0.0, psi_dot_d);
        let eta_ddot_d = Vec3::zeros();

        let mut e = vehicle.eta() - eta_d;
        e[2] = wrap_angle(e[2]);
        let e_dot = rotation_map(&vehicle.pose)? * vehicle.nu - eta_dot_d;

        let env_vals = [0, 1, 2].map(|i| self.envelopes[i].at(t));
        let specs = self.specs;
        let te: [TransformedError; 3] =
            [0, 1, 2].map(|i| transform_derivatives(e[i], e_dot[i], &env_vals[i], specs[i].delta_l, specs[i].delta_r));

        let eps1 = Vec3::from(te.map(|x| x.epsilon));
        let eps2 = Vec3::from(te.map(|x| x.epsilon_dot));
        let surface = self.sliding.surface(&cfg.fxtppc, &eps2);
        let d_hat = obs.estimate();
        let fed = if self.feed_estimate { d_hat } else { Vec6::zeros() };
        let terms = compact_terms(&self.model, &vehicle, self.gamma_prev)?;
        let out: ControlOutput = match cfg.scenario.controller {
            ControllerKind::Fxtppc => fxtppc_control(&terms, &eta_ddot_d, &te, &surface, &fed, &cfg.fxtppc)?,
            ControllerKind::Smc => smc_control(&terms, &eta_ddot_d, &e, &e_dot, &cfg.smc)?,
            ControllerKind::Ppc => ppc_control(&terms, &eta_ddot_d, &te, &fed, &cfg.ppc)?.0,
        };
        let (applied, sat) = saturate(&out.raw, &cfg.bounds);

        let tau = if cfg.scenario.environment {
            env_disturbance(t)
        } else {
            Vec6::zeros()
        };
        let nu_dot = self.plant.nu_dot(&vehicle, &applied, &tau);
        let d_truth = truth_disturbance(&self.model, &vehicle, &applied, &nu_dot);

        let violated = te.map(|x| x.violated);
        for i in 0..3 {
            let kinds = (EventKind::ViolationStart, EventKind::ViolationEnd);
            self.violation[i].update(violated[i], t, kinds, Some(i), &mut events);
            let kinds = (EventKind::SaturationStart, EventKind::SaturationEnd);
            self.saturation[i].update(sat[i], t, kinds, Some(i), &mut events);
        }
        let kinds = (EventKind::DampedInverseStart, EventKind::DampedInverseEnd);
        self.damped.update(out.damped, t, kinds, None, &mut events);
        self.log.events.extend(events);

        if k.is_multiple_of(cfg.scenario.log_decimation) {
            let arr6 = |v: &Vec6| [v[0], v[1], v[2], v[3], v[4], v[5]];
            let arr3 = |v: &Vec3| [v[0], v[1], v[2]];
            self.log.records.push(SimRecord {
                t,
                pose: arr6(&vehicle.pose),
                nu: arr6(&vehicle.nu),
                eta_d: arr3(&eta_d),
                e: arr3(&e),
                epsilon: te.map(|x| x.epsilon),
                envelope: env_vals.map(|v| v.p),
                u_raw: arr3(&out.raw.to_vector()),
                u: arr3(&applied.to_vector()),
                d_truth: arr6(&d_truth),
                d_hat: arr6(&d_hat),
                violated,
                saturated: sat,
                damped: out.damped,
            });
        }

        let (plant, model) = (&self.plant, &self.model);
        self.x = integrate_step(&self.x, t, dt, |ts, xs| joint_rhs(cfg, plant, model, &applied, ts, xs))?;
        if !cfg.scenario.observer {
            // Keep the observer idle so its estimate stays at zero.
            let (v, _) = unpack(&self.x);
            self.x = pack(&v, &ObserverState::at_rest(&v.nu));
        }

        if cfg.scenario.controller == ControllerKind::Fxtppc {
            let freeze = if cfg.fxtppc.anti_windup { sat } else { [false; 3] };
            self.sliding = self.sliding.advance(&cfg.fxtppc, &self.exps, &eps1, &eps2, dt, freeze);
        }
        self.gamma_prev = applied.gamma;
        Ok(())
    }
}

/// Run the configured scenario. A failing step ends the run early and is
/// reported in [`Simulation::abort`] alongside the log up to that point;
/// only an invalid configuration is returned as an error.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation> {
    cfg.validate()?;
    let mut runner = Runner::new(cfg)?;
    let mut abort = None;
    for k in 0..cfg.steps() {
        let t = k as f64 * cfg.scenario.dt;
        if let Err(error) = runner.step(k, t) {
            abort = Some(Abort { t, error });
            break;
        }
    }
    Ok(Simulation {
        controller: cfg.scenario.controller,
        log: runner.log,
        abort,
    })
}

/// Simulate the configured scenario and compute its metrics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    simulate(cfg)?.finish(&cfg.fxtppc)
}
