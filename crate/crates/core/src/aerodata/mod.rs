//! Framework data model: single items, streams, finite lists, navigation
//! commands and detections.

pub mod stream;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{DaasError, Result};
use crate::time::SimTime;

pub use stream::{Cursor, StreamData, SubscriptionHandle};

/// Lineage of an item derived from a camera frame; used to reconstruct the
/// per-frame latency breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trace {
    pub frame_seq: u64,
    pub t_capture: SimTime,
    pub t_dispatch: Option<SimTime>,
    pub t_infer_start: Option<SimTime>,
    pub t_infer_end: Option<SimTime>,
    /// Sum of analytic compute latencies charged along the chain.
    pub compute: SimTime,
}

impl Trace {
    pub fn capture(frame_seq: u64, t_capture: SimTime) -> Self {
        Self {
            frame_seq,
            t_capture,
            t_dispatch: None,
            t_infer_start: None,
            t_infer_end: None,
            compute: SimTime::ZERO,
        }
    }
}

/// A single data item with its simulation timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroData<E> {
    data: E,
    timestamp: SimTime,
    trace: Option<Trace>,
}

impl<E> AeroData<E> {
    pub fn new(data: E, timestamp: SimTime) -> Self {
        Self {
            data,
            timestamp,
            trace: None,
        }
    }

    pub fn with_trace(mut self, trace: Option<Trace>) -> Self {
        self.trace = trace;
        self
    }

    pub fn get_data(&self) -> &E {
        &self.data
    }

    /// Replaces the value; the timestamp is kept.
    pub fn set_data(&mut self, value: E) {
        self.data = value;
    }

    pub fn into_data(self) -> E {
        self.data
    }

    pub fn timestamp(&self) -> SimTime {
        self.timestamp
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }
}

/// Finite, immutable list of items.
#[derive(Debug, Clone, PartialEq)]
pub struct ListData<E> {
    items: Arc<[E]>,
}

impl<E> ListData<E> {
    pub fn new(items: Vec<E>) -> Self {
        Self {
            items: items.into(),
        }
    }

    pub fn items(&self) -> &[E] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, E> {
        self.items.iter()
    }
}

impl<E> From<Vec<E>> for ListData<E> {
    fn from(v: Vec<E>) -> Self {
        Self::new(v)
    }
}

/// Motion primitive understood by every navigable backend.
///
/// Velocity components are in the body frame: `vx` forward, `vy` left,
/// `vz` up. Positions are in the local ENU frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NavKind {
    Takeoff {
        height: f64,
    },
    Waypoint {
        x: f64,
        y: f64,
        z: f64,
        yaw: f64,
        speed: f64,
    },
    Velocity {
        vx: f64,
        vy: f64,
        vz: f64,
        yaw_rate: f64,
        duration: SimTime,
    },
    Hover,
    Land,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavigationCommand {
    pub kind: NavKind,
    /// Set by the navigation merge when the command enters a robot.
    pub priority: u32,
}

impl NavigationCommand {
    pub fn takeoff(height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(DaasError::InvalidArgument(format!(
                "takeoff height must be > 0, got {height}"
            )));
        }
        Ok(Self::from_kind(NavKind::Takeoff { height }))
    }

    pub fn waypoint(x: f64, y: f64, z: f64, yaw: f64, speed: f64) -> Result<Self> {
        if !(speed > 0.0) {
            return Err(DaasError::InvalidArgument(format!(
                "waypoint speed must be > 0, got {speed}"
            )));
        }
        Ok(Self::from_kind(NavKind::Waypoint {
            x,
            y,
            z,
            yaw,
            speed,
        }))
    }

    pub fn velocity(vx: f64, vy: f64, vz: f64, yaw_rate: f64, duration: SimTime) -> Result<Self> {
        if duration == SimTime::ZERO {
            return Err(DaasError::InvalidArgument(
                "velocity duration must be > 0".into(),
            ));
        }
        Ok(Self::from_kind(NavKind::Velocity {
            vx,
            vy,
            vz,
            yaw_rate,
            duration,
        }))
    }

    pub fn hover() -> Self {
        Self::from_kind(NavKind::Hover)
    }

    pub fn land() -> Self {
        Self::from_kind(NavKind::Land)
    }

    fn from_kind(kind: NavKind) -> Self {
        Self { kind, priority: 0 }
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.priority = priority;
        self
    }

    pub fn is_land(&self) -> bool {
        matches!(self.kind, NavKind::Land)
    }
}

/// Detection in normalized image coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub label: String,
    pub confidence: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    /// Builds a box clipped to the unit square; confidence is clamped to [0, 1].
    pub fn new(label: impl Into<String>, confidence: f64, cx: f64, cy: f64, w: f64, h: f64) -> Self {
        let x0 = (cx - w / 2.0).clamp(0.0, 1.0);
        let x1 = (cx + w / 2.0).clamp(0.0, 1.0);
        let y0 = (cy - h / 2.0).clamp(0.0, 1.0);
        let y1 = (cy + h / 2.0).clamp(0.0, 1.0);
        Self {
            label: label.into(),
            confidence: confidence.clamp(0.0, 1.0),
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}
