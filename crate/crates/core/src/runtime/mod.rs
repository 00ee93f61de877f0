//! Executes a composed application on the simulation clock and captures
//! its metrics.

pub mod graph;
pub mod merge;
pub mod metrics;
pub mod plan;

use std::sync::Arc;
use std::time::Instant;

use parking_lot::Mutex;

use crate::drone::{MissionState, RobotHandle};
use crate::error::Result;
use crate::sim::{ClockMode, Simulation};
use crate::time::SimTime;

pub use graph::{build_graph, AppDescription, ApplicationGraph, NodeDesc, Role};
pub use merge::NavigationMerger;
pub use metrics::{BatterySample, FrameRecord, RunMetrics, TrajectorySample};
pub use plan::{emit_plan, DeploymentPlan};

/// Trajectory and battery sampling period.
pub const SAMPLE_PERIOD: SimTime = SimTime::from_millis(100);

#[derive(Default)]
struct Samples {
    trajectory: Vec<TrajectorySample>,
    battery: Vec<BatterySample>,
}

fn sample(robot: &RobotHandle, t: SimTime, out: &mut Samples) {
    if out.trajectory.last().is_some_and(|s| s.t >= t) {
        return;
    }
    let s = robot.state();
    out.trajectory.push(TrajectorySample {
        t,
        x: s.position.x,
        y: s.position.y,
        z: s.position.z,
        yaw: s.yaw,
    });
    out.battery.push(BatterySample {
        t,
        percent: s.battery,
    });
}

fn schedule_sampler(sim: Simulation, robot: RobotHandle, at: SimTime, out: Arc<Mutex<Samples>>) {
    let s = sim.clone();
    sim.schedule_at(at, move || {
        sample(&robot, at, &mut out.lock());
        if robot.mission_state() != MissionState::Ended {
            schedule_sampler(s, robot, at + SAMPLE_PERIOD, out);
        }
    });
}

/// Starts idle robots, runs until `duration` elapses or every robot has
/// ended, then lands anything still flying.
///
/// Trajectory and battery are sampled from the first robot.
pub fn run(graph: &ApplicationGraph, duration: SimTime, mode: ClockMode) -> Result<RunMetrics> {
    let sim = graph.simulation().clone();
    sim.set_mode(mode);
    let wall = Instant::now();
    let start = sim.now();
    for r in graph.robots() {
        if r.mission_state() == MissionState::Idle {
            r.start_mission()?;
        }
    }
    let samples = Arc::new(Mutex::new(Samples::default()));
    if let Some(r) = graph.robots().first() {
        sample(r, start, &mut samples.lock());
        schedule_sampler(sim.clone(), r.clone(), start + SAMPLE_PERIOD, samples.clone());
    }

    let robots = graph.robots().to_vec();
    let all_ended = || {
        !robots.is_empty()
            && robots
                .iter()
                .all(|r| r.mission_state() == MissionState::Ended)
    };
    sim.run_until_or(start + duration, all_ended);
    let mut reports = Vec::new();
    for r in &robots {
        let report = match r.mission_state() {
            MissionState::Active | MissionState::Paused => r.end_mission()?,
            _ => r.report(),
        };
        reports.push(report);
    }
    if let Some(r) = robots.first() {
        sample(r, sim.now(), &mut samples.lock());
    }
    sim.set_mode(ClockMode::Virtual);

    let samples = std::mem::take(&mut *samples.lock());
    let journal = sim.journal();
    let frames = journal.frames.lock().clone();
    let jobs = journal.jobs.lock().clone();
    let alerts = journal.alerts.lock().clone();
    let drop_counts = reports
        .iter()
        .flat_map(|r| r.drop_counts.clone())
        .collect();
    Ok(RunMetrics {
        frames,
        trajectory: samples.trajectory,
        battery: samples.battery,
        jobs,
        alerts,
        reports,
        drop_counts,
        peak_rss_bytes: metrics::peak_rss_bytes(),
        simulated: sim.now() - start,
        wall_time: wall.elapsed(),
    })
}
