use std::fmt;
use std::sync::{Arc, Weak};

use nalgebra::Vector3;
use serde::Serialize;

use super::camera::{CameraModel, Frame};
use super::robot::RobotInner;
use super::MissionState;
use crate::aerodata::stream::{CAMERA_CAPACITY, DEFAULT_CAPACITY};
use crate::aerodata::{AeroData, StreamData, Trace};
use crate::config::{SensorKind, SensorMode, SensorSpec};
use crate::error::{DaasError, Result};
use crate::sim::Simulation;
use crate::time::SimTime;

/// Pose, velocity and battery of the carrying robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Odometry {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
    pub battery: f64,
}

/// Local-frame position shifted by the environment origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpsFix {
    pub position: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryLevel {
    pub percent: f64,
}

#[doc(hidden)]
#[derive(Clone)]
pub enum Channel {
    Camera(StreamData<Frame>),
    Gps(StreamData<GpsFix>),
    Odometry(StreamData<Odometry>),
    Battery(StreamData<BatteryLevel>),
}

/// Item types a sensor can stream.
pub trait SensorPayload: Clone + Send + 'static {
    const KIND: SensorKind;
    #[doc(hidden)]
    fn channel(ch: &Channel) -> Option<&StreamData<Self>>;
}

macro_rules! payload {
    ($ty:ty, $kind:ident) => {
        impl SensorPayload for $ty {
            const KIND: SensorKind = SensorKind::$kind;
            fn channel(ch: &Channel) -> Option<&StreamData<Self>> {
                match ch {
                    Channel::$kind(s) => Some(s),
                    _ => None,
                }
            }
        }
    };
}

payload!(Frame, Camera);
payload!(GpsFix, Gps);
payload!(Odometry, Odometry);
payload!(BatteryLevel, Battery);

pub(crate) enum Mount {
    Robot(Weak<RobotInner>),
    Fixed { position: Vector3<f64>, yaw: f64 },
}

struct SensorInner {
    spec: SensorSpec,
    channel: Channel,
    mount: Mount,
    camera: Option<CameraModel>,
    origin: Vector3<f64>,
    sim: Simulation,
}

/// Shared handle to an onboard or environment sensor.
#[derive(Clone)]
pub struct SensorHandle(Arc<SensorInner>);

impl fmt::Debug for SensorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensorHandle")
            .field("id", &self.0.spec.id)
            .field("kind", &self.0.spec.kind)
            .finish()
    }
}

impl PartialEq for SensorHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl SensorHandle {
    pub(crate) fn new(
        spec: SensorSpec,
        mount: Mount,
        camera: Option<CameraModel>,
        origin: Vector3<f64>,
        sim: Simulation,
    ) -> Self {
        let name = spec.id.clone();
        let channel = match spec.kind {
            SensorKind::Camera => Channel::Camera(StreamData::with_capacity(name, CAMERA_CAPACITY)),
            SensorKind::Gps => Channel::Gps(StreamData::with_capacity(name, DEFAULT_CAPACITY)),
            SensorKind::Odometry => {
                Channel::Odometry(StreamData::with_capacity(name, DEFAULT_CAPACITY))
            }
            SensorKind::Battery => Channel::Battery(StreamData::with_capacity(name, DEFAULT_CAPACITY)),
        };
        Self(Arc::new(SensorInner {
            spec,
            channel,
            mount,
            camera,
            origin,
            sim,
        }))
    }

    pub fn get_sensor_id(&self) -> &str {
        &self.0.spec.id
    }

    pub fn kind(&self) -> SensorKind {
        self.0.spec.kind
    }

    pub fn mode(&self) -> SensorMode {
        self.0.spec.mode
    }

    pub fn rate(&self) -> f64 {
        self.0.spec.rate
    }

    pub fn spec(&self) -> &SensorSpec {
        &self.0.spec
    }

    /// `id`, `kind`, `rate`, `mode`, or any configured parameter.
    pub fn get_sensor_property(&self, prop: &str) -> Option<serde_json::Value> {
        let s = &self.0.spec;
        match prop {
            "id" => Some(s.id.clone().into()),
            "kind" => Some(s.kind.as_str().into()),
            "rate" => Some(s.rate.into()),
            "mode" => Some(serde_json::to_value(s.mode).expect("mode serializes")),
            other => s.params.get(other).cloned(),
        }
    }

    /// The sensor's stream. Fails if `E` is not what this sensor produces.
    pub fn get_data_stream<E: SensorPayload>(&self) -> Result<StreamData<E>> {
        let stream = E::channel(&self.0.channel).cloned().ok_or_else(|| {
            DaasError::InvalidArgument(format!(
                "sensor `{}` produces {} data, not {}",
                self.0.spec.id,
                self.0.spec.kind.as_str(),
                E::KIND.as_str()
            ))
        })?;
        self.0.sim.recorder().sensor(&self.0.spec.id);
        Ok(stream)
    }

    pub fn drop_count(&self) -> u64 {
        match &self.0.channel {
            Channel::Camera(s) => s.drop_count(),
            Channel::Gps(s) => s.drop_count(),
            Channel::Odometry(s) => s.drop_count(),
            Channel::Battery(s) => s.drop_count(),
        }
    }

    pub fn published(&self) -> u64 {
        match &self.0.channel {
            Channel::Camera(s) => s.published(),
            Channel::Gps(s) => s.published(),
            Channel::Odometry(s) => s.published(),
            Channel::Battery(s) => s.published(),
        }
    }

    /// Schedules emissions at `t0 + k/rate` for k = 1, 2, ...
    pub(crate) fn start(&self, t0: SimTime) {
        self.schedule_emission(t0, 1);
    }

    fn schedule_emission(&self, t0: SimTime, k: u64) {
        let at = t0 + SimTime::from_micros((k as f64 * 1e6 / self.0.spec.rate).round() as u64);
        let me = self.clone();
        self.0.sim.schedule_at(at, move || {
            if me.emit(at) {
                me.schedule_emission(t0, k + 1);
            }
        });
    }

    // Returns false once the carrying robot is gone or its mission ended.
    fn emit(&self, t: SimTime) -> bool {
        let (position, velocity, yaw, battery) = match &self.0.mount {
            Mount::Fixed { position, yaw } => (*position, Vector3::zeros(), *yaw, 100.0),
            Mount::Robot(weak) => {
                let Some(robot) = weak.upgrade() else {
                    return false;
                };
                let s = robot.state();
                if s.mission == MissionState::Ended {
                    return false;
                }
                (s.position, s.velocity, s.yaw, s.battery)
            }
        };
        // Emission times are strictly increasing per sensor, so publish
        // cannot regress.
        let published = match &self.0.channel {
            Channel::Camera(stream) => {
                let cam = self.0.camera.as_ref().expect("camera sensors carry a model");
                let frame = cam.render(position, yaw, t);
                let trace = Trace::capture(stream.published(), t);
                stream.publish_data(AeroData::new(frame, t).with_trace(Some(trace)))
            }
            Channel::Gps(stream) => stream.publish(
                GpsFix {
                    position: position + self.0.origin,
                },
                t,
            ),
            Channel::Odometry(stream) => stream.publish(
                Odometry {
                    position,
                    velocity,
                    yaw,
                    battery,
                },
                t,
            ),
            Channel::Battery(stream) => stream.publish(BatteryLevel { percent: battery }, t),
        };
        published.is_ok()
    }
}
