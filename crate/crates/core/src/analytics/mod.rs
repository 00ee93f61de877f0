//! Analytics: the transform plugin surface, the deploy/analyse pipeline
//! and the built-in analytics.

pub mod detect;
pub mod fire;
pub mod follow;
pub mod monitor;
pub mod pid;
pub mod pose;
pub mod save;
pub mod survey;

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use serde::Serialize;

use crate::aerodata::{AeroData, BoundingBox, NavigationCommand, StreamData};
use crate::compute::{deploy, ComputeHandle, DeploymentHandle};
use crate::error::{DaasError, Result};
use crate::sim::{RuntimeSettings, Simulation};
use crate::time::SimTime;

pub use detect::{builtin_blob_detector, fire_detection, vip_detection, BlobDetector};
pub use fire::{fire_alert, FireAlert};
pub use follow::{follow_object, FollowGains, FollowObject};
pub use monitor::{monitoring, Monitoring};
pub use pid::{Pid, PidGains};
pub use pose::{body_pose, BodyPose};
pub use save::{save_data, Persist, SaveData};
pub use survey::{get_rectangular_survey_path, DEFAULT_SWATH};

/// A raised alert. `t` is the time the producing job completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlertRecord {
    pub t: SimTime,
    pub kind: String,
    pub source: String,
    pub label: String,
    pub confidence: f64,
    pub bbox: Option<BoundingBox>,
}

impl AlertRecord {
    pub const CSV_HEADER: &'static str = "t_ms,kind,label,confidence,cx,cy,w,h";

    pub fn csv_row(&self) -> String {
        let geom = match &self.bbox {
            Some(b) => format!("{:.3},{:.3},{:.3},{:.3}", b.cx, b.cy, b.w, b.h),
            None => ",,,".into(),
        };
        format!(
            "{},{},{},{:.3},{}",
            self.t.fmt_ms(),
            self.kind,
            self.label,
            self.confidence,
            geom
        )
    }
}

/// Per-item context handed to [`Transform::process`].
pub struct Context {
    pub now: SimTime,
    /// Name of the input channel.
    pub input: String,
    pub settings: RuntimeSettings,
    alerts: Vec<AlertRecord>,
}

impl Context {
    fn new(now: SimTime, input: &str, settings: RuntimeSettings) -> Self {
        Self {
            now,
            input: input.to_string(),
            settings,
            alerts: Vec::new(),
        }
    }

    /// Journals an alert when the item's job completes.
    pub fn alert(&mut self, alert: AlertRecord) {
        self.alerts.push(alert);
    }
}

/// The computation an analytic performs on each input item.
pub trait Transform: Send + 'static {
    type Input: Clone + Send + 'static;
    type Output: Clone + Send + 'static;

    /// Key into compute service-time tables.
    fn name(&self) -> &str;

    /// Vision transforms see only every `frame_cadence`-th item.
    fn is_vision(&self) -> bool {
        false
    }

    /// Fail-fast checks at deploy time.
    fn on_deploy(&mut self, _target: &ComputeHandle, _settings: &RuntimeSettings) -> Result<()> {
        Ok(())
    }

    fn process(&mut self, item: &AeroData<Self::Input>, ctx: &mut Context) -> Vec<Self::Output>;

    /// Called on each output as it is published at time `t`.
    fn stamp(_out: &mut Self::Output, _t: SimTime) {}

    /// Silence after which [`on_idle`](Self::on_idle) fires once.
    fn idle_timeout(&self) -> Option<SimTime> {
        None
    }

    fn on_idle(&mut self, _ctx: &mut Context) -> Vec<Self::Output> {
        Vec::new()
    }
}

/// A transform plus its deployment.
pub struct Analytic<T: Transform> {
    name: String,
    transform: Arc<Mutex<T>>,
    deployment: Mutex<Option<DeploymentHandle>>,
}

impl<T: Transform> fmt::Debug for Analytic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Analytic")
            .field("name", &self.name)
            .field("deployment", &*self.deployment.lock())
            .finish()
    }
}

impl<T: Transform> Analytic<T> {
    pub fn new(transform: T) -> Self {
        Self {
            name: transform.name().to_string(),
            transform: Arc::new(Mutex::new(transform)),
            deployment: Mutex::new(None),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn deployment(&self) -> Option<DeploymentHandle> {
        self.deployment.lock().clone()
    }

    /// Binds the analytic to `target`; later analyse calls submit there.
    pub fn deploy(&self, target: &ComputeHandle) -> Result<DeploymentHandle> {
        let handle = deploy(&self.name, target)?;
        self.transform
            .lock()
            .on_deploy(target, &target.sim().settings())?;
        *self.deployment.lock() = Some(handle.clone());
        Ok(handle)
    }

    /// Runs the transform on every item of `input`.
    ///
    /// Each processed item is charged as a job on the deployed resource; its
    /// outputs are published when that job's result is back.
    pub fn analyse(&self, input: &StreamData<T::Input>) -> Result<StreamData<T::Output>> {
        let deployment = self
            .deployment()
            .ok_or_else(|| DaasError::NotDeployed(self.name.clone()))?;
        let sim = deployment.target().sim().clone();
        let node = sim
            .recorder()
            .analytic(&self.name, deployment.target(), input.name());
        let pipe = Arc::new(Pipeline {
            transform: self.transform.clone(),
            vision: self.transform.lock().is_vision(),
            deployment,
            out: StreamData::new(node),
            input: input.name().to_string(),
            generation: AtomicU64::new(0),
            sim,
        });
        let p = pipe.clone();
        // the subscription lives as long as the input stream
        let _ = input.subscribe(move |seq, item| p.dispatch(seq, item));
        pipe.arm_timer();
        Ok(pipe.out.clone())
    }
}

impl<T: Transform<Output = NavigationCommand>> Analytic<T> {
    /// [`analyse`](Self::analyse) for analytics that produce navigation.
    pub fn generate_navigation(
        &self,
        input: &StreamData<T::Input>,
    ) -> Result<StreamData<NavigationCommand>> {
        self.analyse(input)
    }
}

struct Pipeline<T: Transform> {
    transform: Arc<Mutex<T>>,
    vision: bool,
    deployment: DeploymentHandle,
    out: StreamData<T::Output>,
    input: String,
    generation: AtomicU64,
    sim: Simulation,
}

impl<T: Transform> Pipeline<T> {
    fn dispatch(self: &Arc<Self>, seq: u64, item: &AeroData<T::Input>) {
        let settings = self.sim.settings();
        if self.vision && !seq.is_multiple_of(u64::from(settings.frame_cadence.max(1))) {
            return;
        }
        let now = self.sim.now();
        let mut ctx = Context::new(now, &self.input, settings);
        let outputs = self.transform.lock().process(item, &mut ctx);
        let mut trace = item.trace().copied();
        let Ok(job) = self.deployment.submit(trace.map(|t| t.frame_seq)) else {
            // deploy verified the service time; nothing else can fail
            return;
        };
        if let Some(tr) = trace.as_mut() {
            if tr.t_dispatch.is_none() {
                tr.t_dispatch = Some(now);
                tr.t_infer_start = Some(job.t_start);
                tr.t_infer_end = Some(job.t_result);
            }
            tr.compute += job.latency();
        }
        let me = self.clone();
        self.sim.schedule_at(job.t_result, move || {
            me.complete(outputs, ctx.alerts, trace);
        });
        self.generation.fetch_add(1, Ordering::SeqCst);
        self.arm_timer();
    }

    fn complete(
        &self,
        outputs: Vec<T::Output>,
        alerts: Vec<AlertRecord>,
        trace: Option<crate::aerodata::Trace>,
    ) {
        let t = self.sim.now();
        if !alerts.is_empty() {
            let mut journal = self.sim.journal().alerts.lock();
            journal.extend(alerts.into_iter().map(|mut a| {
                a.t = t;
                a
            }));
        }
        for mut o in outputs {
            T::stamp(&mut o, t);
            // publish times come from the shared clock and never regress
            let _ = self.out.publish_data(AeroData::new(o, t).with_trace(trace));
        }
    }

    fn arm_timer(self: &Arc<Self>) {
        let Some(timeout) = self.transform.lock().idle_timeout() else {
            return;
        };
        let armed = self.generation.load(Ordering::SeqCst);
        let me = self.clone();
        self.sim.schedule_in(timeout, move || {
            if me.generation.load(Ordering::SeqCst) != armed {
                return;
            }
            let mut ctx = Context::new(me.sim.now(), &me.input, me.sim.settings());
            let outputs = me.transform.lock().on_idle(&mut ctx);
            me.complete(outputs, ctx.alerts, None);
        });
    }
}

/// Directory for analytic output: the explicit one, else the run's output
/// directory, else the working directory.
pub(crate) fn resolve_dir(explicit: &Option<PathBuf>, settings: &RuntimeSettings) -> PathBuf {
    explicit
        .clone()
        .or_else(|| settings.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}
