//! Turns a run request into an environment, a composed application, a run
//! and its output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use daas_core::compute::{write_job_log, Policy};
use daas_core::config::ComputeKind;
use daas_core::drone::{BackendRegistry, Disturbance};
use daas_core::runtime::metrics::write_csv;
use daas_core::runtime::{build_graph, emit_plan, run, DeploymentPlan, FrameRecord, RunMetrics};
use daas_core::runtime::{BatterySample, TrajectorySample};
use daas_core::analytics::AlertRecord;
use daas_core::{load_config, ClockMode, DaasError, Environment, Result, SimTime};

use crate::apps::App;
use crate::report::{render_svg, Summary};

/// Replaces one service time, written `compute:analytic=ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceOverride {
    pub compute: String,
    pub analytic: String,
    pub ms: f64,
}

impl FromStr for ServiceOverride {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("expected compute:analytic=ms, got `{s}`");
        let (target, ms) = s.split_once('=').ok_or_else(bad)?;
        let (compute, analytic) = target.split_once(':').ok_or_else(bad)?;
        let ms: f64 = ms.parse().map_err(|_| bad())?;
        if compute.is_empty() || analytic.is_empty() || !(ms.is_finite() && ms > 0.0) {
            return Err(bad());
        }
        Ok(Self {
            compute: compute.into(),
            analytic: analytic.into(),
            ms,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub app: App,
    pub config: PathBuf,
    /// Policy applied to every scheduler in the environment.
    pub scheduler: Option<Policy>,
    pub duration: SimTime,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: ClockMode,
    /// Altitude disturbance amplitude in metres; `None` uses the app default
    /// and 0 disables it.
    pub disturbance: Option<f64>,
    pub service_overrides: Vec<ServiceOverride>,
}

impl RunRequest {
    pub fn new(app: App, config: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            app,
            config: config.into(),
            scheduler: None,
            duration: SimTime::from_secs(120),
            seed: 7,
            out: out.into(),
            mode: ClockMode::Virtual,
            disturbance: None,
            service_overrides: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.duration == SimTime::ZERO {
            return Err(DaasError::Validation("duration must be > 0".into()));
        }
        fs::create_dir_all(self.out.join("data")).map_err(|e| {
            DaasError::Validation(format!("cannot create {}: {e}", self.out.display()))
        })
    }
}

pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub plan: DeploymentPlan,
    pub summary: Summary,
}

/// Loads the configuration with the request's overrides applied and
/// instantiates it. The application is not composed yet.
pub fn setup(req: &RunRequest) -> Result<Environment> {
    req.validate()?;
    let mut cfg = load_config(&req.config)?;
    cfg.seed = req.seed;
    if let Some(policy) = req.scheduler {
        for c in cfg.compute.iter_mut().filter(|c| c.kind == ComputeKind::Scheduler) {
            c.policy = Some(policy.name().into());
        }
    }
    for o in &req.service_overrides {
        let spec = cfg
            .compute_spec_mut(&o.compute)
            .ok_or_else(|| DaasError::Validation(format!("unknown compute `{}`", o.compute)))?;
        spec.service_times.insert(o.analytic.clone(), o.ms);
    }
    let env = Environment::build(cfg, req.config.parent(), &BackendRegistry::default())?;
    let data = req.out.join("data");
    env.simulation()
        .update_settings(|s| s.output_dir = Some(data));
    let amplitude = req
        .disturbance
        .unwrap_or(if req.app.follows_subject() { Disturbance::DEFAULT.amplitude } else { 0.0 });
    if amplitude > 0.0 {
        for r in env.get_env_robots() {
            r.set_altitude_disturbance(Some(Disturbance {
                amplitude,
                ..Disturbance::DEFAULT
            }));
        }
    }
    Ok(env)
}

/// Composes the application on `env`, runs it and writes every output file.
pub fn execute_in(env: &Environment, req: &RunRequest) -> Result<RunOutcome> {
    req.app.compose(env)?;
    let graph = build_graph(env, env.app_description())?;
    let plan = emit_plan(&graph);
    let metrics = run(&graph, req.duration, req.mode)?;
    let summary = Summary::from_metrics(req.app.name(), &metrics);
    write_outputs(&req.out, &metrics, &plan, &summary)?;
    Ok(RunOutcome {
        metrics,
        plan,
        summary,
    })
}

pub fn execute(req: &RunRequest) -> Result<RunOutcome> {
    let env = setup(req)?;
    let outcome = execute_in(&env, req);
    // pending events hold handles back into the simulation
    env.simulation().clear_pending();
    outcome
}

pub fn write_outputs(
    out: &Path,
    m: &RunMetrics,
    plan: &DeploymentPlan,
    summary: &Summary,
) -> Result<()> {
    let file = |name: &str| fs::File::create(out.join(name)).map(std::io::BufWriter::new);
    write_csv(file("trajectory.csv")?, TrajectorySample::CSV_HEADER, &m.trajectory, |s| s.csv_row())?;
    write_csv(file("battery.csv")?, BatterySample::CSV_HEADER, &m.battery, |s| s.csv_row())?;
    write_csv(file("latency.csv")?, FrameRecord::CSV_HEADER, &m.frames, |r| r.csv_row())?;
    write_csv(file("alerts.csv")?, AlertRecord::CSV_HEADER, &m.alerts, |a| a.csv_row())?;
    write_job_log(file("jobs.csv")?, &m.jobs)?;
    fs::write(out.join("plan.json"), plan.to_json())?;
    fs::write(out.join("summary.txt"), summary.render())?;
    fs::write(out.join("plot.svg"), render_svg(m))?;
    Ok(())
}

/// Output files every run writes.
pub const OUTPUT_FILES: [&str; 8] = [
    "trajectory.csv",
    "battery.csv",
    "latency.csv",
    "alerts.csv",
    "jobs.csv",
    "plan.json",
    "summary.txt",
    "plot.svg",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn service_override_syntax() {
        let o: ServiceOverride = "edge:vip_detect=100".parse().unwrap();
        assert_eq!((o.compute.as_str(), o.analytic.as_str(), o.ms), ("edge", "vip_detect", 100.0));
        assert!("edge=100".parse::<ServiceOverride>().is_err());
        assert!("edge:x=-1".parse::<ServiceOverride>().is_err());
    }
}
