//! Visual-servo follower: turns detections into body-frame velocity
//! commands with three independent PID loops.

use super::pid::{Pid, PidGains};
use super::{Analytic, Context, Transform};
use crate::aerodata::{AeroData, BoundingBox, NavigationCommand};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowGains {
    pub yaw: PidGains,
    pub vertical: PidGains,
    pub forward: PidGains,
}

impl Default for FollowGains {
    fn default() -> Self {
        Self {
            yaw: PidGains::new(1.2, 0.05, 0.1),
            vertical: PidGains::new(1.0, 0.02, 0.05),
            forward: PidGains::new(2.0, 0.0, 0.2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FollowObject {
    pub gains: FollowGains,
    /// Box area (normalized) held when at the desired distance.
    pub target_area: f64,
    /// Lifetime of each emitted velocity command.
    pub frame_period: SimTime,
    pub timeout: SimTime,
    yaw: Pid,
    vertical: Pid,
    forward: Pid,
    last_input: Option<SimTime>,
}

impl FollowObject {
    pub fn new(gains: FollowGains) -> Self {
        Self {
            gains,
            target_area: 0.2,
            frame_period: SimTime::from_micros(66_667),
            timeout: SimTime::from_secs(1),
            yaw: Pid::new(gains.yaw),
            vertical: Pid::new(gains.vertical),
            forward: Pid::new(gains.forward),
            last_input: None,
        }
    }

    /// Caps every loop's output, e.g. at the robot's top speed.
    pub fn with_output_clamp(mut self, clamp: f64) -> Self {
        let g = &mut self.gains;
        for p in [&mut g.yaw, &mut g.vertical, &mut g.forward] {
            *p = p.with_output_clamp(clamp);
        }
        Self::new(self.gains)
    }

    /// Control law for one box observed `dt` seconds after the previous one.
    pub fn command(&mut self, b: &BoundingBox, dt: f64) -> NavigationCommand {
        let yaw_rate = self.yaw.update(0.5 - b.cx, dt);
        let vz = self.vertical.update(0.5 - b.cy, dt);
        let vx = self.forward.update(self.target_area - b.area(), dt);
        NavigationCommand::velocity(vx, 0.0, vz, yaw_rate, self.frame_period)
            .expect("frame period is positive")
    }

    fn reset(&mut self) {
        self.yaw.reset();
        self.vertical.reset();
        self.forward.reset();
        self.last_input = None;
    }
}

impl Default for FollowObject {
    fn default() -> Self {
        Self::new(FollowGains::default())
    }
}

impl Transform for FollowObject {
    type Input = BoundingBox;
    type Output = NavigationCommand;

    fn name(&self) -> &str {
        "follow_nav"
    }

    fn process(&mut self, item: &AeroData<BoundingBox>, _: &mut Context) -> Vec<NavigationCommand> {
        let t = item.timestamp();
        let dt = match self.last_input {
            Some(prev) if t > prev => (t - prev).as_secs_f64(),
            _ => self.frame_period.as_secs_f64(),
        };
        self.last_input = Some(t);
        vec![self.command(item.get_data(), dt)]
    }

    fn idle_timeout(&self) -> Option<SimTime> {
        Some(self.timeout)
    }

    fn on_idle(&mut self, _: &mut Context) -> Vec<NavigationCommand> {
        self.reset();
        vec![NavigationCommand::hover()]
    }
}

pub fn follow_object() -> Analytic<FollowObject> {
    Analytic::new(FollowObject::default())
}
