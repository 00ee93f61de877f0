use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use parking_lot::Mutex;

use super::backend::{Backend, Kinematics, Motion};
use super::camera::CameraModel;
use super::sensor::{Mount, SensorHandle};
use super::{Disturbance, DroneState, MissionReport, MissionState, VERTICAL_SPEED};
use crate::aerodata::{AeroData, ListData, NavKind, NavigationCommand, StreamData};
use crate::config::{RobotSpec, SensorKind};
use crate::error::{DaasError, Result};
use crate::runtime::merge::NavigationMerger;
use crate::runtime::metrics::FrameRecord;
use crate::sim::Simulation;
use crate::time::SimTime;

// Upper bound on how long end_mission will wait for a landing.
const LANDING_BUDGET: SimTime = SimTime::from_secs(3_600);

struct InFlight {
    cmd: NavigationCommand,
    elapsed: SimTime,
}

struct Core {
    kin: Kinematics,
    battery: f64,
    mission: MissionState,
    last_update: SimTime,
    queue: VecDeque<NavigationCommand>,
    current: Option<InFlight>,
    merger: Option<NavigationMerger>,
    terminal: bool,
    disturbance: Option<Disturbance>,
    distance: f64,
    t_start: Option<SimTime>,
    t_end: Option<SimTime>,
}

pub(crate) struct RobotInner {
    spec: RobotSpec,
    sim: Simulation,
    backend: Arc<dyn Backend>,
    sensors: Vec<SensorHandle>,
    core: Mutex<Core>,
}

/// Shared handle to a robot; clones refer to the same drone.
#[derive(Clone)]
pub struct RobotHandle(Arc<RobotInner>);

impl fmt::Debug for RobotHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RobotHandle")
            .field("id", &self.0.spec.id)
            .field("backend", &self.0.backend.name())
            .finish()
    }
}

impl PartialEq for RobotHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

// The segment a motion stays valid for, rounded up to whole microseconds.
fn travel_time(dist: f64, speed: f64) -> SimTime {
    if speed <= 0.0 {
        return SimTime::from_micros(u64::MAX / 4);
    }
    SimTime::from_micros((dist / speed * 1e6).ceil() as u64)
}

fn body_to_world(yaw: f64, vx: f64, vy: f64, vz: f64) -> Vector3<f64> {
    let (s, c) = yaw.sin_cos();
    Vector3::new(vx * c - vy * s, vx * s + vy * c, vz)
}

enum Decision {
    Move { motion: Motion, horizon: SimTime },
    /// The in-flight queued command is finished; re-decide at the same time.
    Completed,
    Landed,
}

impl RobotInner {
    fn max_speed(&self) -> f64 {
        self.spec.max_speed
    }

    fn vertical_speed(&self) -> f64 {
        VERTICAL_SPEED.min(self.spec.max_speed)
    }

    pub(crate) fn state(&self) -> DroneState {
        let mut core = self.core.lock();
        self.integrate(&mut core, self.sim.now());
        snapshot(&core)
    }

    // Motion toward a fixed point; `None` once there.
    fn approach(&self, kin: &Kinematics, target: Vector3<f64>, speed: f64, yaw: Option<f64>) -> Option<(Motion, SimTime)> {
        let dist = (target - kin.position).norm();
        if dist == 0.0 {
            return None;
        }
        Some((Motion::GoTo { target, speed, yaw }, travel_time(dist, speed)))
    }

    fn decide(&self, core: &mut Core, t: SimTime) -> Decision {
        let kin = core.kin;
        let vs = self.vertical_speed();
        let climb = |z: f64| {
            let target = Vector3::new(kin.position.x, kin.position.y, z.max(0.0));
            self.approach(&kin, target, vs, None)
        };
        if core.terminal {
            return match climb(0.0) {
                Some((motion, horizon)) => Decision::Move { motion, horizon },
                None => Decision::Landed,
            };
        }
        if core.current.is_none() {
            core.current = core.queue.pop_front().map(|cmd| InFlight {
                cmd,
                elapsed: SimTime::ZERO,
            });
        }
        if let Some(cur) = &core.current {
            let step = match cur.cmd.kind {
                NavKind::Takeoff { height } => climb(height),
                NavKind::Waypoint { x, y, z, yaw, speed } => {
                    let speed = speed.min(self.max_speed());
                    self.approach(&kin, Vector3::new(x, y, z.max(0.0)), speed, Some(yaw))
                }
                NavKind::Velocity { vx, vy, vz, yaw_rate, duration } => {
                    (cur.elapsed < duration).then(|| {
                        let velocity = body_to_world(kin.yaw, vx, vy, vz);
                        (Motion::Velocity { velocity, yaw_rate }, duration - cur.elapsed)
                    })
                }
                NavKind::Hover => None,
                NavKind::Land => {
                    return match climb(0.0) {
                        Some((motion, horizon)) => Decision::Move { motion, horizon },
                        None => Decision::Landed,
                    }
                }
            };
            return match step {
                Some((motion, horizon)) => Decision::Move { motion, horizon },
                None => Decision::Completed,
            };
        }
        let active = core.merger.as_mut().and_then(|m| m.active(t));
        let never = SimTime::from_micros(u64::MAX / 4);
        let hold = Decision::Move {
            motion: Motion::Hold,
            horizon: never,
        };
        let Some((arrived, cmd)) = active else {
            return hold;
        };
        let step = match cmd.kind {
            NavKind::Land => {
                core.terminal = true;
                return self.decide(core, t);
            }
            NavKind::Hover => None,
            NavKind::Takeoff { height } => climb(height),
            NavKind::Waypoint { x, y, z, yaw, speed } => {
                let speed = speed.min(self.max_speed());
                self.approach(&kin, Vector3::new(x, y, z.max(0.0)), speed, Some(yaw))
            }
            NavKind::Velocity { vx, vy, vz, yaw_rate, duration } => {
                let until = arrived + duration;
                (t < until).then(|| {
                    let mut velocity = body_to_world(kin.yaw, vx, vy, vz);
                    if let Some(d) = core.disturbance {
                        velocity.z += d.vz(t);
                    }
                    (Motion::Velocity { velocity, yaw_rate }, until - t)
                })
            }
        };
        match step {
            Some((motion, horizon)) => Decision::Move { motion, horizon },
            None => hold,
        }
    }

    /// Advances the robot from its last update to `now` in piecewise-constant
    /// segments no longer than one tick. Commands that finish exactly at
    /// `now` are retired before returning.
    fn integrate(&self, core: &mut Core, now: SimTime) {
        let tick = self.sim.settings().tick;
        loop {
            let t = core.last_update;
            match core.mission {
                MissionState::Idle | MissionState::Ended => {
                    core.last_update = t.max(now);
                    return;
                }
                MissionState::Paused => {
                    if t >= now {
                        return;
                    }
                    let seg = (now - t).min(tick);
                    core.kin.velocity = Vector3::zeros();
                    discharge(core, self.spec.battery.hover_rate, seg);
                    core.last_update = t + seg;
                    continue;
                }
                MissionState::Active => {}
            }
            match self.decide(core, t) {
                Decision::Completed => core.current = None,
                Decision::Landed => {
                    core.mission = MissionState::Ended;
                    core.kin.velocity = Vector3::zeros();
                    core.current = None;
                    core.queue.clear();
                    core.t_end = Some(t);
                }
                Decision::Move { motion, horizon } => {
                    if t >= now {
                        return;
                    }
                    let seg = (now - t).min(tick).min(horizon);
                    let next = self.backend.step(&core.kin, &motion, seg, self.max_speed());
                    core.distance += (next.position - core.kin.position).norm();
                    core.kin = next;
                    let rate = if next.velocity.norm() > 1e-6 {
                        self.spec.battery.cruise_rate
                    } else {
                        self.spec.battery.hover_rate
                    };
                    discharge(core, rate, seg);
                    if let Some(cur) = core.current.as_mut() {
                        cur.elapsed += seg;
                    }
                    core.last_update = t + seg;
                }
            }
        }
    }

    fn on_command(&self, source: usize, item: &AeroData<NavigationCommand>) {
        let now = self.sim.now();
        {
            let mut core = self.core.lock();
            self.integrate(&mut core, now);
            if core.mission == MissionState::Ended {
                return;
            }
            let cmd = item.get_data().with_priority(source as u32);
            if let Some(m) = core.merger.as_mut() {
                m.push(source, cmd, now);
            }
        }
        if let Some(tr) = item.trace() {
            if let Some(rec) = FrameRecord::from_trace(tr, now) {
                self.sim.journal().frames.lock().push(rec);
            }
        }
    }
}

fn discharge(core: &mut Core, rate: f64, dt: SimTime) {
    core.battery = (core.battery - rate * dt.as_secs_f64()).max(0.0);
}

fn snapshot(core: &Core) -> DroneState {
    DroneState {
        position: core.kin.position,
        velocity: core.kin.velocity,
        yaw: core.kin.yaw,
        battery: core.battery,
        mission: core.mission,
    }
}

fn tick(robot: Arc<RobotInner>, at: SimTime) {
    let ended = {
        let mut core = robot.core.lock();
        robot.integrate(&mut core, at);
        core.mission == MissionState::Ended
    };
    if !ended {
        let next = at + robot.sim.settings().tick;
        let r = robot.clone();
        robot.sim.schedule_at(next, move || tick(r, next));
    }
}

impl RobotHandle {
    pub(crate) fn new(
        spec: RobotSpec,
        backend: Arc<dyn Backend>,
        cameras: Vec<Option<CameraModel>>,
        origin: Vector3<f64>,
        sim: Simulation,
    ) -> Self {
        let inner = Arc::new_cyclic(|weak| {
            let sensors = spec
                .sensors
                .iter()
                .cloned()
                .zip(cameras)
                .map(|(s, cam)| {
                    SensorHandle::new(s, Mount::Robot(weak.clone()), cam, origin, sim.clone())
                })
                .collect();
            RobotInner {
                core: Mutex::new(Core {
                    kin: Kinematics::default(),
                    battery: spec.battery.initial,
                    mission: MissionState::Idle,
                    last_update: sim.now(),
                    queue: VecDeque::new(),
                    current: None,
                    merger: None,
                    terminal: false,
                    disturbance: None,
                    distance: 0.0,
                    t_start: None,
                    t_end: None,
                }),
                spec,
                sim,
                backend,
                sensors,
            }
        });
        Self(inner)
    }

    pub fn id(&self) -> &str {
        &self.0.spec.id
    }

    pub fn spec(&self) -> &RobotSpec {
        &self.0.spec
    }

    pub fn backend_name(&self) -> &str {
        self.0.backend.name()
    }

    pub fn capabilities(&self) -> &[&'static str] {
        self.0.backend.capabilities()
    }

    pub fn is_navigable(&self) -> bool {
        self.0.backend.is_navigable()
    }

    /// Current state, integrated up to the simulation clock.
    pub fn state(&self) -> DroneState {
        self.0.state()
    }

    pub fn mission_state(&self) -> MissionState {
        self.0.core.lock().mission
    }

    pub fn get_robot_sensors(&self) -> &[SensorHandle] {
        &self.0.sensors
    }

    pub fn is_robot_sensor_available(&self, sid: &str) -> bool {
        self.0.sensors.iter().any(|s| s.get_sensor_id() == sid)
    }

    pub fn get_sensor_by_id(&self, sid: &str) -> Result<SensorHandle> {
        self.0
            .sensors
            .iter()
            .find(|s| s.get_sensor_id() == sid)
            .cloned()
            .ok_or_else(|| DaasError::not_found("sensor", sid))
    }

    /// First onboard sensor of the given kind.
    pub fn sensor_of_kind(&self, kind: SensorKind) -> Option<SensorHandle> {
        self.0.sensors.iter().find(|s| s.kind() == kind).cloned()
    }

    /// Adds (or clears) the altitude gust model.
    pub fn set_altitude_disturbance(&self, d: Option<Disturbance>) {
        self.0.core.lock().disturbance = d;
    }

    fn illegal(op: &'static str, state: MissionState) -> DaasError {
        DaasError::IllegalState {
            op,
            state: state.to_string(),
        }
    }

    /// Idle to Active: enqueues the default takeoff and starts the physics
    /// tick and sensor emission.
    pub fn start_mission(&self) -> Result<()> {
        let now = self.0.sim.now();
        {
            let mut core = self.0.core.lock();
            if core.mission != MissionState::Idle {
                return Err(Self::illegal("start mission", core.mission));
            }
            core.mission = MissionState::Active;
            core.last_update = now;
            core.t_start = Some(now);
            if self.is_navigable() {
                let takeoff = NavigationCommand::takeoff(self.0.spec.takeoff_height)?;
                core.queue.push_front(takeoff);
            }
        }
        let next = now + self.0.sim.settings().tick;
        let r = self.0.clone();
        self.0.sim.schedule_at(next, move || tick(r, next));
        for s in &self.0.sensors {
            s.start(now);
        }
        Ok(())
    }

    /// Freezes the robot in place; the battery keeps discharging.
    pub fn pause_mission(&self) -> Result<()> {
        let mut core = self.0.core.lock();
        self.0.integrate(&mut core, self.0.sim.now());
        if core.mission != MissionState::Active {
            return Err(Self::illegal("pause mission", core.mission));
        }
        core.mission = MissionState::Paused;
        core.kin.velocity = Vector3::zeros();
        Ok(())
    }

    pub fn resume_mission(&self) -> Result<()> {
        let mut core = self.0.core.lock();
        self.0.integrate(&mut core, self.0.sim.now());
        if core.mission != MissionState::Paused {
            return Err(Self::illegal("resume mission", core.mission));
        }
        core.mission = MissionState::Active;
        Ok(())
    }

    /// Lands and ends the mission, running the simulation until touchdown.
    pub fn end_mission(&self) -> Result<MissionReport> {
        {
            let mut core = self.0.core.lock();
            self.0.integrate(&mut core, self.0.sim.now());
            match core.mission {
                MissionState::Active | MissionState::Paused => {
                    core.mission = MissionState::Active;
                    core.terminal = true;
                }
                other => return Err(Self::illegal("end mission", other)),
            }
        }
        let deadline = self.0.sim.now() + LANDING_BUDGET;
        self.0
            .sim
            .run_until_or(deadline, || self.mission_state() == MissionState::Ended);
        if self.mission_state() != MissionState::Ended {
            return Err(DaasError::InvalidArgument(format!(
                "robot `{}` did not land within {}",
                self.id(),
                LANDING_BUDGET
            )));
        }
        Ok(self.report())
    }

    /// Flight statistics so far; complete once the mission has ended.
    pub fn report(&self) -> MissionReport {
        let now = self.0.sim.now();
        let core = self.0.core.lock();
        let flight_time = match core.t_start {
            Some(s) => core.t_end.unwrap_or(now).saturating_sub(s),
            None => SimTime::ZERO,
        };
        MissionReport {
            robot: self.id().to_string(),
            flight_time,
            distance: core.distance,
            final_battery: core.battery,
            final_position: core.kin.position,
            drop_counts: self
                .0
                .sensors
                .iter()
                .map(|s| (s.get_sensor_id().to_string(), s.drop_count()))
                .collect::<BTreeMap<_, _>>(),
        }
    }

    fn check_navigable(&self, core: &Core) -> Result<()> {
        if !self.is_navigable() {
            return Err(DaasError::UnsupportedCapability {
                robot: self.id().to_string(),
                capability: super::backend::NAVIGABLE,
            });
        }
        if core.mission != MissionState::Active {
            return Err(Self::illegal("navigate", core.mission));
        }
        Ok(())
    }

    /// Queues a finite command list, executed in order after anything
    /// already queued.
    pub fn navigate(&self, commands: &ListData<NavigationCommand>) -> Result<()> {
        let mut core = self.0.core.lock();
        self.check_navigable(&core)?;
        self.0.integrate(&mut core, self.0.sim.now());
        core.queue.extend(commands.iter().copied());
        drop(core);
        self.0.sim.recorder().robot(self.id(), &[], Some(commands.len()));
        Ok(())
    }

    /// Drives the robot from command streams once its queue is empty.
    /// A stream's priority is its index; later streams win.
    pub fn navigate_streams(&self, sources: &[StreamData<NavigationCommand>]) -> Result<()> {
        {
            let mut core = self.0.core.lock();
            self.check_navigable(&core)?;
            if core.merger.is_some() {
                return Err(DaasError::InvalidArgument(format!(
                    "robot `{}` already has navigation streams",
                    self.id()
                )));
            }
            let freshness = self.0.sim.settings().freshness;
            core.merger = Some(NavigationMerger::new(sources.len(), freshness));
        }
        for (i, stream) in sources.iter().enumerate() {
            let weak = Arc::downgrade(&self.0);
            // the subscription lives as long as the stream
            let _ = stream.subscribe(move |_, item| {
                if let Some(r) = weak.upgrade() {
                    r.on_command(i, item);
                }
            });
        }
        let names: Vec<String> = sources.iter().map(|s| s.name().to_string()).collect();
        self.0.sim.recorder().robot(self.id(), &names, None);
        Ok(())
    }

    /// Integrated path length so far, m.
    pub fn distance_flown(&self) -> f64 {
        self.state();
        self.0.core.lock().distance
    }
}
