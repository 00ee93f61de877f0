//! Robots, their mission lifecycle, pluggable backends and simulated sensors.

pub mod backend;
pub mod camera;
mod robot;
pub mod sensor;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector3;

use crate::time::SimTime;

pub use backend::{Backend, BackendRegistry, Kinematics, Motion};
pub use camera::{CameraModel, Frame, TargetScript};
pub use robot::RobotHandle;
pub use sensor::{BatteryLevel, GpsFix, Odometry, SensorHandle, SensorPayload};

/// Waypoints count as reached within this distance.
pub const ARRIVAL_TOLERANCE: f64 = 0.5;
/// A landing is complete at or below this altitude.
pub const LANDING_TOLERANCE: f64 = 0.05;
/// Vertical speed cap for takeoff and landing, m/s.
pub const VERTICAL_SPEED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MissionState {
    Idle,
    Active,
    Paused,
    Ended,
}

impl fmt::Display for MissionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MissionState::Idle => "idle",
            MissionState::Active => "active",
            MissionState::Paused => "paused",
            MissionState::Ended => "ended",
        };
        f.write_str(s)
    }
}

/// Snapshot of a robot. Position is in the local ENU frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
    pub battery: f64,
    pub mission: MissionState,
}

/// Sinusoidal vertical gust applied while the robot tracks streamed
/// velocity commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    /// Peak altitude deviation it would cause without correction, m.
    pub amplitude: f64,
    pub period: SimTime,
}

impl Disturbance {
    pub const DEFAULT: Disturbance = Disturbance {
        amplitude: 0.15,
        period: SimTime::from_secs(8),
    };

    /// Vertical velocity at time `t`: the derivative of `A sin(wt)`.
    pub fn vz(&self, t: SimTime) -> f64 {
        let p = self.period.as_secs_f64();
        if p <= 0.0 {
            return 0.0;
        }
        let w = 2.0 * std::f64::consts::PI / p;
        self.amplitude * w * (w * t.as_secs_f64()).cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionReport {
    pub robot: String,
    pub flight_time: SimTime,
    /// Path length flown, m.
    pub distance: f64,
    pub final_battery: f64,
    pub final_position: Vector3<f64>,
    /// Evicted-unread items per sensor stream.
    pub drop_counts: BTreeMap<String, u64>,
}
