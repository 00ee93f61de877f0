//! Backend plugin interface and the built-in simulated backends.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::time::SimTime;

pub const NAVIGABLE: &str = "navigable";

/// The part of the drone state a backend integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
}

impl Default for Kinematics {
    fn default() -> Self {
        Self {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            yaw: 0.0,
        }
    }
}

/// Low-level motion request resolved from the active navigation command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Hold,
    /// Fly straight to `target` at `speed`, then stop on it.
    GoTo {
        target: Vector3<f64>,
        speed: f64,
        yaw: Option<f64>,
    },
    /// World-frame velocity.
    Velocity {
        velocity: Vector3<f64>,
        yaw_rate: f64,
    },
    /// Vertical move to altitude `z` at `speed`.
    Climb { z: f64, speed: f64 },
}

/// A drone platform. `step` must be a pure function of its arguments.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn capabilities(&self) -> &[&'static str];

    fn step(&self, state: &Kinematics, motion: &Motion, dt: SimTime, max_speed: f64) -> Kinematics;

    fn is_navigable(&self) -> bool {
        self.capabilities().contains(&NAVIGABLE)
    }
}

/// First-order point mass: velocity is set directly, capped at `max_speed`,
/// and the drone never goes below the ground plane.
#[derive(Debug, Default, Clone, Copy)]
pub struct KinematicBackend;

impl Backend for KinematicBackend {
    fn name(&self) -> &str {
        "sim-kinematic"
    }

    fn capabilities(&self) -> &[&'static str] {
        &[NAVIGABLE, "camera", "gps", "odometry", "battery"]
    }

    fn step(&self, state: &Kinematics, motion: &Motion, dt: SimTime, max_speed: f64) -> Kinematics {
        let dt_s = dt.as_secs_f64();
        let mut next = *state;
        if dt_s <= 0.0 {
            return next;
        }
        let (target, speed) = match *motion {
            Motion::Hold => {
                next.velocity = Vector3::zeros();
                return next;
            }
            Motion::Velocity { velocity, yaw_rate } => {
                let v = cap(velocity, max_speed);
                let mut p = state.position + v * dt_s;
                if p.z < 0.0 {
                    p.z = 0.0;
                }
                next.velocity = (p - state.position) / dt_s;
                next.position = p;
                next.yaw = wrap_angle(state.yaw + yaw_rate * dt_s);
                return next;
            }
            Motion::GoTo { target, speed, yaw } => {
                if let Some(y) = yaw {
                    next.yaw = wrap_angle(y);
                }
                (target, speed)
            }
            Motion::Climb { z, speed } => (
                Vector3::new(state.position.x, state.position.y, z.max(0.0)),
                speed,
            ),
        };
        let speed = speed.min(max_speed).max(0.0);
        let delta = target - state.position;
        let dist = delta.norm();
        let reach = speed * dt_s;
        if dist <= reach {
            next.position = target;
        } else {
            next.position = state.position + delta * (reach / dist);
        }
        next.velocity = (next.position - state.position) / dt_s;
        next
    }
}

/// Platform that carries sensors but cannot fly.
#[derive(Debug, Default, Clone, Copy)]
pub struct SensorsOnlyBackend;

impl Backend for SensorsOnlyBackend {
    fn name(&self) -> &str {
        "sim-sensors-only"
    }

    fn capabilities(&self) -> &[&'static str] {
        &["camera", "gps", "odometry", "battery"]
    }

    fn step(&self, state: &Kinematics, _: &Motion, _: SimTime, _: f64) -> Kinematics {
        Kinematics {
            velocity: Vector3::zeros(),
            ..*state
        }
    }
}

fn cap(v: Vector3<f64>, max: f64) -> Vector3<f64> {
    let n = v.norm();
    if n > max && n > 0.0 {
        v * (max / n)
    } else {
        v
    }
}

/// Wraps to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Named backend plugins available to an environment.
#[derive(Clone)]
pub struct BackendRegistry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self {
            backends: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, backend: Arc<dyn Backend>) {
        self.backends.insert(backend.name().to_string(), backend);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Backend>> {
        self.backends.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(KinematicBackend));
        r.register(Arc::new(SensorsOnlyBackend));
        r
    }
}

impl fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.backends.keys()).finish()
    }
}
