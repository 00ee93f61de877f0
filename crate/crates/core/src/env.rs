//! The environment registry: robots, sensors and compute resources built
//! from a configuration document.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;

use crate::compute::ComputeHandle;
use crate::config::{ComputeKind, EnvironmentConfig, SensorKind, SensorSpec};
use crate::drone::camera::CameraModel;
use crate::drone::sensor::Mount;
use crate::drone::{BackendRegistry, RobotHandle, SensorHandle};
use crate::error::{DaasError, Result};
use crate::runtime::graph::AppDescription;
use crate::sim::Simulation;
use crate::time::SimTime;

/// Owns every resource instantiated from a configuration.
#[derive(Debug)]
pub struct Environment {
    config: EnvironmentConfig,
    sim: Simulation,
    robots: Vec<RobotHandle>,
    env_sensors: Vec<SensorHandle>,
    compute: Vec<ComputeHandle>,
}

/// Loads and instantiates a configuration file. Relative paths inside it
/// (camera target scripts) resolve against the file's directory.
pub fn load_environment(path: impl AsRef<Path>) -> Result<Environment> {
    let path = path.as_ref();
    let config = load_config(path)?;
    Environment::build(config, path.parent(), &BackendRegistry::default())
}

/// Reads and validates a local configuration file without instantiating it.
pub fn load_config(path: impl AsRef<Path>) -> Result<EnvironmentConfig> {
    let path = path.as_ref();
    reject_remote(path)?;
    EnvironmentConfig::from_path(path)
}

fn reject_remote(path: &Path) -> Result<()> {
    let text = path.to_string_lossy();
    if let Some((scheme, _)) = text.split_once("://") {
        return Err(DaasError::UnsupportedScheme(scheme.to_string()));
    }
    Ok(())
}

fn camera_for(spec: &SensorSpec, base_dir: Option<&Path>) -> Result<Option<CameraModel>> {
    match spec.kind {
        SensorKind::Camera => CameraModel::from_spec(spec, base_dir).map(Some),
        _ => Ok(None),
    }
}

fn fixed_pose(spec: &SensorSpec) -> Result<(Vector3<f64>, f64)> {
    let position = match spec.params.get("position") {
        Some(v) => serde_json::from_value::<[f64; 3]>(v.clone()).map_err(|_| {
            DaasError::Validation(format!("sensor `{}`: position must be [x, y, z]", spec.id))
        })?,
        None => [0.0; 3],
    };
    Ok((Vector3::from(position), spec.param_f64("yaw").unwrap_or(0.0)))
}

impl Environment {
    /// Instantiates an already-parsed configuration with the built-in backends.
    pub fn from_config(config: EnvironmentConfig) -> Result<Self> {
        Self::build(config, None, &BackendRegistry::default())
    }

    /// Instantiates a configuration with a custom backend registry.
    pub fn build(
        config: EnvironmentConfig,
        base_dir: Option<&Path>,
        backends: &BackendRegistry,
    ) -> Result<Self> {
        config.validate()?;
        let sim = Simulation::new(config.seed);
        let origin = Vector3::from(config.origin);

        let mut robots = Vec::with_capacity(config.robots.len());
        for spec in &config.robots {
            let backend = backends.get(&spec.backend).ok_or_else(|| {
                DaasError::Validation(format!(
                    "robot `{}`: unknown backend `{}` (available: {})",
                    spec.id,
                    spec.backend,
                    backends.names().collect::<Vec<_>>().join(", ")
                ))
            })?;
            let cameras = spec
                .sensors
                .iter()
                .map(|s| camera_for(s, base_dir))
                .collect::<Result<Vec<_>>>()?;
            robots.push(RobotHandle::new(spec.clone(), backend, cameras, origin, sim.clone()));
        }

        let mut env_sensors = Vec::with_capacity(config.env_sensors.len());
        for spec in &config.env_sensors {
            let (position, yaw) = fixed_pose(spec)?;
            let sensor = SensorHandle::new(
                spec.clone(),
                Mount::Fixed { position, yaw },
                camera_for(spec, base_dir)?,
                origin,
                sim.clone(),
            );
            sensor.start(SimTime::ZERO);
            env_sensors.push(sensor);
        }

        // members are declared before use by validation, but not necessarily
        // earlier in the list
        let mut compute: Vec<ComputeHandle> = Vec::with_capacity(config.compute.len());
        for spec in config.compute.iter().filter(|c| c.kind != ComputeKind::Scheduler) {
            compute.push(ComputeHandle::resource(spec.clone(), sim.clone()));
        }
        for spec in config.compute.iter().filter(|c| c.kind == ComputeKind::Scheduler) {
            let members = spec
                .members
                .iter()
                .map(|m| {
                    compute
                        .iter()
                        .find(|c| c.id() == m)
                        .cloned()
                        .ok_or_else(|| DaasError::not_found("compute", m.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            compute.push(ComputeHandle::scheduler(spec.clone(), members, sim.clone())?);
        }
        // keep declaration order for listings
        compute.sort_by_key(|c| config.compute.iter().position(|s| s.id == c.id()));

        Ok(Self {
            config,
            sim,
            robots,
            env_sensors,
            compute,
        })
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn now(&self) -> SimTime {
        self.sim.now()
    }

    pub fn get_env_robots(&self) -> &[RobotHandle] {
        &self.robots
    }

    pub fn get_robot_by_id(&self, rid: &str) -> Result<RobotHandle> {
        self.robots
            .iter()
            .find(|r| r.id() == rid)
            .cloned()
            .ok_or_else(|| DaasError::not_found("robot", rid))
    }

    pub fn get_env_sensors(&self) -> &[SensorHandle] {
        &self.env_sensors
    }

    pub fn has_env_sensors(&self) -> bool {
        !self.env_sensors.is_empty()
    }

    pub fn get_env_sensor_by_id(&self, sid: &str) -> Result<SensorHandle> {
        self.env_sensors
            .iter()
            .find(|s| s.get_sensor_id() == sid)
            .cloned()
            .ok_or_else(|| DaasError::not_found("sensor", sid))
    }

    pub fn get_compute_resources(&self) -> &[ComputeHandle] {
        &self.compute
    }

    pub fn get_compute_resource_by_id(&self, cid: &str) -> Result<ComputeHandle> {
        self.compute
            .iter()
            .find(|c| c.id() == cid)
            .cloned()
            .ok_or_else(|| DaasError::not_found("compute", cid))
    }

    /// Advances the simulation by `dt`, running every event that falls due.
    pub fn step(&self, dt: SimTime) -> Result<()> {
        if dt == SimTime::ZERO {
            return Err(DaasError::InvalidArgument("step dt must be > 0".into()));
        }
        self.sim.run_until(self.sim.now() + dt);
        Ok(())
    }

    /// What the application has composed so far against this environment.
    pub fn app_description(&self) -> AppDescription {
        self.sim.recorder().snapshot()
    }

    /// Directory used for relative analytic output, if configured.
    pub fn output_dir(&self) -> Option<PathBuf> {
        self.sim.settings().output_dir
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remote_scheme_rejected() {
        let err = load_environment("AeroDaaS://provider.example/foo/config.json").unwrap_err();
        assert!(matches!(err, DaasError::UnsupportedScheme(s) if s == "AeroDaaS"));
    }

    #[test]
    fn empty_environment() {
        let env = Environment::from_config(EnvironmentConfig::default()).unwrap();
        assert!(!env.has_env_sensors());
        assert!(env.get_env_robots().is_empty());
        assert!(env.get_compute_resources().is_empty());
        assert_eq!(env.now(), SimTime::ZERO);
    }

    #[test]
    fn unknown_backend_is_validation_error() {
        let cfg = EnvironmentConfig::from_json(
            r#"{"robots":[{"id":"r","backend":"warp-drive","max_speed":1}]}"#,
        )
        .unwrap();
        assert!(matches!(
            Environment::from_config(cfg),
            Err(DaasError::Validation(m)) if m.contains("warp-drive")
        ));
    }
}
