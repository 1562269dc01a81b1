//! Scenario configuration: a TOML document with one table per subsystem.
//! Every field has a default, so a file only needs to list what differs
//! from the attitude-switching scenario.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::control::{FxtGains, PpcGains, SmcGains};
use crate::dynamics::{GliderParams, InputBounds, UncertaintyConfig};
use crate::envelope::PerformanceSpec;
use crate::error::{GliderError, Result};
use crate::guidance::IlosGains;
use crate::observer::ObserverGains;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    AttitudeSwitching,
    WaypointFollowing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Smc,
    Ppc,
    Fxtppc,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [ControllerKind::Smc, ControllerKind::Ppc, ControllerKind::Fxtppc];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Smc => "smc",
            ControllerKind::Ppc => "ppc",
            ControllerKind::Fxtppc => "fxtppc",
        }
    }

    /// Whether the law feeds back the disturbance estimate.
    pub fn uses_observer(self) -> bool {
        !matches!(self, ControllerKind::Smc)
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = GliderError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smc" => Ok(ControllerKind::Smc),
            "ppc" => Ok(ControllerKind::Ppc),
            "fxtppc" => Ok(ControllerKind::Fxtppc),
            other => Err(GliderError::Config(format!(
                "unknown controller `{other}` (expected smc, ppc or fxtppc)"
            ))),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    /// Simulated horizon `T_f` in seconds.
    pub horizon: f64,
    pub dt: f64,
    pub controller: ControllerKind,
    /// Feed the disturbance estimate to the laws that use it.
    pub observer: bool,
    /// Apply the sinusoidal environmental forcing.
    pub environment: bool,
    pub log_decimation: usize,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::AttitudeSwitching,
            horizon: 800.0,
            dt: 0.01,
            controller: ControllerKind::Fxtppc,
            observer: true,
            environment: true,
            log_decimation: 1,
        }
    }
}

/// One performance spec per controlled channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSet {
    pub depth: PerformanceSpec,
    pub pitch: PerformanceSpec,
    pub heading: PerformanceSpec,
}

impl EnvelopeSet {
    pub fn attitude_switching() -> Self {
        Self {
            depth: PerformanceSpec::new(1.0, 0.2, 100.0),
            pitch: PerformanceSpec::new(5.0 * PI / 18.0, PI / 18.0, 80.0),
            heading: PerformanceSpec::new(5.0 * PI / 18.0, PI / 12.0, 100.0),
        }
    }

    pub fn waypoint_following() -> Self {
        Self {
            depth: PerformanceSpec::new(1.0, 0.5, 100.0),
            pitch: PerformanceSpec::new(5.0 * PI / 18.0, PI / 18.0, 80.0),
            heading: PerformanceSpec::new(5.0 * PI / 18.0, 2.0 * PI / 45.0, 60.0),
        }
    }

    pub fn as_array(&self) -> [PerformanceSpec; 3] {
        [self.depth, self.pitch, self.heading]
    }
}

impl Default for EnvelopeSet {
    fn default() -> Self {
        Self::attitude_switching()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceConfig {
    pub waypoints: Vec<[f64; 2]>,
    /// Waypoint acceptance radius.
    pub radius: f64,
    pub lookahead: f64,
    pub k_i: f64,
    /// Reset the integral state when a new waypoint becomes active.
    pub reset_integral_on_switch: bool,
    /// Bound on the attack angle added to the gliding angle in the pitch
    /// reference. The small-angle flight model only holds for small `alpha`.
    pub attack_angle_limit: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            waypoints: vec![[10.0, 5.0], [15.0, -10.0], [30.0, -15.0], [50.0, -5.0], [50.0, 10.0]],
            radius: 5.0,
            lookahead: 2.5,
            k_i: 0.01,
            reset_integral_on_switch: true,
            attack_angle_limit: 0.2,
        }
    }
}

impl GuidanceConfig {
    pub fn ilos_gains(&self) -> IlosGains {
        IlosGains {
            lookahead: self.lookahead,
            k_i: self.k_i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    /// `[X, Y, Z, phi, theta, psi]`
    pub pose: [f64; 6],
    /// `[u, v, w, p, q, r]`
    pub nu: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub uncertainty: UncertaintyConfig,
    pub glider: GliderParams,
    pub bounds: InputBounds,
    pub envelope: EnvelopeSet,
    pub fxtppc: FxtGains,
    pub smc: SmcGains,
    pub ppc: PpcGains,
    pub observer: ObserverGains,
    pub guidance: GuidanceConfig,
    pub initial: InitialState,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::attitude_switching()
    }
}

impl ScenarioConfig {
    /// Periodic attitude switching over 800 s.
    pub fn attitude_switching() -> Self {
        Self {
            scenario: ScenarioSection::default(),
            uncertainty: UncertaintyConfig::default(),
            glider: GliderParams::seawing(),
            bounds: InputBounds::default(),
            envelope: EnvelopeSet::attitude_switching(),
            fxtppc: FxtGains::default(),
            smc: SmcGains::default(),
            ppc: PpcGains::default(),
            observer: ObserverGains::default(),
            guidance: GuidanceConfig::default(),
            initial: InitialState::default(),
        }
    }

    /// iLOS waypoint following.
    pub fn waypoint_following() -> Self {
        let mut cfg = Self::attitude_switching();
        cfg.scenario.kind = ScenarioKind::WaypointFollowing;
        cfg.scenario.horizon = 1000.0;
        cfg.envelope = EnvelopeSet::waypoint_following();
        cfg
    }

    pub fn with_controller(mut self, controller: ControllerKind) -> Self {
        self.scenario.controller = controller;
        self
    }

    /// Number of integration steps covering the horizon.
    pub fn steps(&self) -> usize {
        (self.scenario.horizon / self.scenario.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(GliderError::Config(format!(
                "scenario.dt must be positive, got {}",
                s.dt
            )));
        }
        if !(s.horizon >= s.dt) {
            return Err(GliderError::Config(format!(
                "scenario.horizon ({}) must be at least dt ({})",
                s.horizon, s.dt
            )));
        }
        if s.log_decimation < 1 {
            return Err(GliderError::Config("scenario.log_decimation must be >= 1".into()));
        }
        self.glider.validate()?;
        self.uncertainty.validate()?;
        for spec in self.envelope.as_array() {
            spec.validate()?;
        }
        self.fxtppc.validate()?;
        if self.guidance.waypoints.is_empty() || !(self.guidance.radius > 0.0) {
            return Err(GliderError::Config(
                "guidance needs at least one waypoint and a positive radius".into(),
            ));
        }
        if !(self.guidance.lookahead > 0.0 && self.guidance.k_i > 0.0) {
            return Err(GliderError::Config(
                "guidance.lookahead and guidance.k_i must be positive".into(),
            ));
        }
        if !(self.guidance.attack_angle_limit >= 0.0) {
            return Err(GliderError::Config(
                "guidance.attack_angle_limit must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Parse a TOML document, apply `key.path=value` overrides, validate.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let cfg = Self::parse_unvalidated(text, overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse and apply overrides without range checks, for diagnostics
    /// that report on invalid values.
    pub fn parse_unvalidated(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Value = toml::from_str(text).map_err(|e| GliderError::Config(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        doc.try_into()
            .map_err(|e: toml::de::Error| GliderError::Config(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        Self::from_toml_str(&read_config(path)?, overrides)
    }

    pub fn load_unvalidated(path: &Path, overrides: &[String]) -> Result<Self> {
        Self::parse_unvalidated(&read_config(path)?, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| GliderError::Config(e.to_string()))
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| GliderError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Set `a.b.c = value` inside a TOML document. The value is parsed as a
/// TOML literal and falls back to a plain string.
pub fn apply_override(doc: &mut toml::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| GliderError::Config(format!("override `{assignment}` is not key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() {
        return Err(GliderError::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed table has key v"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    // Shorthand: bare scenario keys such as `dt=0.005`.
    let keys: Vec<&str> = if path.contains('.') {
        path.split('.').collect()
    } else if ScenarioSection::default_keys().contains(&path) {
        vec!["scenario", path]
    } else {
        vec![path]
    };
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| GliderError::Config(format!("`{path}`: `{key}` is not a table")))?;
        node = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| GliderError::Config(format!("`{path}` does not name a table field")))?;
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl ScenarioSection {
    fn default_keys() -> [&'static str; 7] {
        [
            "kind",
            "horizon",
            "dt",
            "controller",
            "observer",
            "environment",
            "log_decimation",
        ]
    }
}
