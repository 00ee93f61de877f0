//! Drones-as-a-service runtime: environments of simulated robots, sensors
//! and compute resources, streaming analytics deployed onto that compute,
//! and an application runtime that plans, launches and measures missions.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aerodata;
pub mod analytics;
pub mod compute;
pub mod config;
pub mod drone;
pub mod env;
pub mod error;
pub mod runtime;
pub mod sim;
pub mod time;

pub use aerodata::{AeroData, BoundingBox, ListData, NavKind, NavigationCommand, StreamData, Trace};
pub use compute::{deploy, ComputeHandle, DeploymentHandle, InferenceJob};
pub use config::EnvironmentConfig;
pub use drone::{Frame, MissionState, RobotHandle, SensorHandle};
pub use env::{load_config, load_environment, Environment};
pub use error::{DaasError, Result};
pub use nalgebra::Vector3;
pub use sim::{ClockMode, RuntimeSettings, Simulation};
pub use time::SimTime;
