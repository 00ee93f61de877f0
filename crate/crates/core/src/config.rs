//! Declarative environment configuration (JSON) and its validation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compute::Policy;
use crate::error::{DaasError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Local frame origin added to GPS fixes.
    #[serde(default)]
    pub origin: [f64; 3],
    #[serde(default)]
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub env_sensors: Vec<SensorSpec>,
    #[serde(default)]
    pub compute: Vec<ComputeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub id: String,
    #[serde(default = "default_backend")]
    pub backend: String,
    pub max_speed: f64,
    #[serde(default)]
    pub battery: BatterySpec,
    /// Altitude of the takeoff enqueued by `start_mission`.
    #[serde(default = "default_takeoff_height")]
    pub takeoff_height: f64,
    #[serde(default)]
    pub sensors: Vec<SensorSpec>,
}

fn default_backend() -> String {
    "sim-kinematic".into()
}

fn default_takeoff_height() -> f64 {
    1.5
}

/// Linear discharge model, percent and percent per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    #[serde(default = "full")]
    pub initial: f64,
    #[serde(default = "hover_rate")]
    pub hover_rate: f64,
    #[serde(default = "cruise_rate")]
    pub cruise_rate: f64,
}

fn full() -> f64 {
    100.0
}
fn hover_rate() -> f64 {
    0.05
}
fn cruise_rate() -> f64 {
    0.08
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self {
            initial: full(),
            hover_rate: hover_rate(),
            cruise_rate: cruise_rate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Camera,
    Gps,
    Odometry,
    Battery,
}

impl SensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Camera => "camera",
            SensorKind::Gps => "gps",
            SensorKind::Odometry => "odometry",
            SensorKind::Battery => "battery",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorMode {
    #[default]
    Push,
    Pull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub id: String,
    pub kind: SensorKind,
    /// Emission rate in Hz.
    pub rate: f64,
    #[serde(default)]
    pub mode: SensorMode,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl SensorSpec {
    pub fn param_f64(&self, key: &str) -> Option<f64> {
        self.params.get(key).and_then(|v| v.as_f64())
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).and_then(|v| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComputeKind {
    Edge,
    Cloud,
    Scheduler,
}

impl ComputeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComputeKind::Edge => "edge",
            ComputeKind::Cloud => "cloud",
            ComputeKind::Scheduler => "scheduler",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeSpec {
    pub id: String,
    pub kind: ComputeKind,
    /// Analytic name to service time in milliseconds.
    #[serde(default)]
    pub service_times: BTreeMap<String, f64>,
    #[serde(default = "one")]
    pub capacity: u32,
    #[serde(default)]
    pub network_delay_ms: f64,
    #[serde(default)]
    pub members: Vec<String>,
    #[serde(default)]
    pub policy: Option<String>,
}

fn one() -> u32 {
    1
}

impl EnvironmentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnvironmentConfig =
            serde_json::from_str(text).map_err(|e| classify_json_error(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DaasError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn compute_spec(&self, id: &str) -> Option<&ComputeSpec> {
        self.compute.iter().find(|c| c.id == id)
    }

    pub fn compute_spec_mut(&mut self, id: &str) -> Option<&mut ComputeSpec> {
        self.compute.iter_mut().find(|c| c.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(DaasError::Validation(msg));

        unique("robot", self.robots.iter().map(|r| r.id.as_str()))?;
        unique(
            "sensor",
            self.env_sensors
                .iter()
                .chain(self.robots.iter().flat_map(|r| r.sensors.iter()))
                .map(|s| s.id.as_str()),
        )?;
        unique("compute", self.compute.iter().map(|c| c.id.as_str()))?;

        for r in &self.robots {
            if !(r.max_speed > 0.0) {
                return invalid(format!("robot `{}`: max_speed must be > 0", r.id));
            }
            let b = &r.battery;
            if !(b.hover_rate >= 0.0 && b.cruise_rate >= 0.0) {
                return invalid(format!("robot `{}`: discharge rates must be >= 0", r.id));
            }
            if !(0.0..=100.0).contains(&b.initial) {
                return invalid(format!("robot `{}`: initial battery must be in [0, 100]", r.id));
            }
            if !(r.takeoff_height > 0.0) {
                return invalid(format!("robot `{}`: takeoff_height must be > 0", r.id));
            }
        }
        for s in self
            .env_sensors
            .iter()
            .chain(self.robots.iter().flat_map(|r| r.sensors.iter()))
        {
            if !(s.rate > 0.0) {
                return invalid(format!("sensor `{}`: rate must be > 0", s.id));
            }
        }
        for s in &self.env_sensors {
            if matches!(s.kind, SensorKind::Odometry | SensorKind::Battery) {
                return invalid(format!(
                    "environment sensor `{}`: kind {} needs a robot",
                    s.id,
                    s.kind.as_str()
                ));
            }
        }

        for c in &self.compute {
            if c.capacity == 0 {
                return invalid(format!("compute `{}`: capacity must be >= 1", c.id));
            }
            if !(c.network_delay_ms >= 0.0) {
                return invalid(format!("compute `{}`: network_delay_ms must be >= 0", c.id));
            }
            if let Some((name, _)) = c.service_times.iter().find(|(_, &ms)| !(ms > 0.0)) {
                return invalid(format!(
                    "compute `{}`: service time for `{name}` must be > 0",
                    c.id
                ));
            }
            match c.kind {
                ComputeKind::Scheduler => self.validate_scheduler(c)?,
                _ => {
                    if !c.members.is_empty() || c.policy.is_some() {
                        return invalid(format!(
                            "compute `{}`: members/policy are only valid on schedulers",
                            c.id
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_scheduler(&self, c: &ComputeSpec) -> Result<()> {
        if c.members.is_empty() {
            return Err(DaasError::Validation(format!(
                "scheduler `{}` needs at least one member",
                c.id
            )));
        }
        let policy: Policy = c
            .policy
            .as_deref()
            .ok_or_else(|| DaasError::Validation(format!("scheduler `{}` needs a policy", c.id)))?
            .parse()
            .map_err(DaasError::Validation)?;
        let mut kinds = Vec::new();
        for m in &c.members {
            match self.compute_spec(m) {
                Some(spec) if spec.kind != ComputeKind::Scheduler => kinds.push(spec.kind),
                Some(_) => {
                    return Err(DaasError::Validation(format!(
                        "scheduler `{}`: member `{m}` is itself a scheduler",
                        c.id
                    )))
                }
                None => {
                    return Err(DaasError::Validation(format!(
                        "scheduler `{}`: dangling member `{m}`",
                        c.id
                    )))
                }
            }
        }
        policy.check_members(&kinds).map_err(|e| {
            DaasError::Validation(format!("scheduler `{}`: {e}", c.id))
        })
    }
}

fn unique<'a>(category: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(DaasError::Validation(format!(
                "duplicate {category} id `{id}`"
            )));
        }
    }
    Ok(())
}

// serde reports unknown fields through the same error type as syntax errors;
// schema violations are validation failures, malformed JSON is a parse error.
fn classify_json_error(e: &serde_json::Error) -> DaasError {
    match e.classify() {
        serde_json::error::Category::Data => DaasError::Validation(e.to_string()),
        _ => DaasError::Parse(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_valid() {
        let cfg = EnvironmentConfig::from_json("{}").unwrap();
        assert!(cfg.robots.is_empty() && cfg.compute.is_empty());
    }

    #[test]
    fn duplicate_compute_ids_rejected() {
        let err = EnvironmentConfig::from_json(
            r#"{"compute":[{"id":"edge","kind":"edge"},{"id":"edge","kind":"cloud"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DaasError::Validation(m) if m.contains("duplicate compute")));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = EnvironmentConfig::from_json(r#"{"robots":[],"extra":1}"#).unwrap_err();
        assert!(matches!(err, DaasError::Validation(_)));
        let err = EnvironmentConfig::from_json(
            r#"{"compute":[{"id":"e","kind":"edge","speed":3}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DaasError::Validation(_)));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(
            EnvironmentConfig::from_json("{\"robots\": [").unwrap_err(),
            DaasError::Parse(_)
        ));
    }

    #[test]
    fn dangling_scheduler_member_rejected() {
        let err = EnvironmentConfig::from_json(
            r#"{"compute":[{"id":"e","kind":"edge"},
               {"id":"s","kind":"scheduler","members":["e","ghost"],"policy":"queue-aware"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DaasError::Validation(m) if m.contains("ghost")));
    }

    #[test]
    fn edge_only_needs_edge_member() {
        let err = EnvironmentConfig::from_json(
            r#"{"compute":[{"id":"c","kind":"cloud"},
               {"id":"s","kind":"scheduler","members":["c"],"policy":"edge-only"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DaasError::Validation(_)));
    }

    #[test]
    fn numeric_invariants() {
        for bad in [
            r#"{"robots":[{"id":"r","max_speed":0}]}"#,
            r#"{"robots":[{"id":"r","max_speed":1,"battery":{"hover_rate":-1}}]}"#,
            r#"{"robots":[{"id":"r","max_speed":1,"sensors":[{"id":"c","kind":"camera","rate":0}]}]}"#,
            r#"{"compute":[{"id":"e","kind":"edge","service_times":{"a":0}}]}"#,
            r#"{"compute":[{"id":"e","kind":"edge","capacity":0}]}"#,
            r#"{"compute":[{"id":"e","kind":"edge","policy":"edge-only"}]}"#,
        ] {
            assert!(
                matches!(EnvironmentConfig::from_json(bad), Err(DaasError::Validation(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn sensor_ids_unique_across_robots() {
        let err = EnvironmentConfig::from_json(
            r#"{"robots":[
                {"id":"a","max_speed":1,"sensors":[{"id":"cam","kind":"camera","rate":1}]},
                {"id":"b","max_speed":1,"sensors":[{"id":"cam","kind":"camera","rate":1}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DaasError::Validation(m) if m.contains("sensor")));
    }
}
