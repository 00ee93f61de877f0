//! Edge/cloud compute resources with FIFO queues and service-time models,
//! scheduler resources, and analytic deployment.

pub mod policy;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ComputeKind, ComputeSpec};
use crate::error::{DaasError, Result};
use crate::sim::Simulation;
use crate::time::SimTime;

pub use policy::{schedule, MemberEstimate, Policy};

/// One analytic invocation and its timeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceJob {
    pub job_id: u64,
    pub analytic: String,
    pub frame_seq: Option<u64>,
    pub resource_id: String,
    pub t_submit: SimTime,
    pub t_start: SimTime,
    pub t_end: SimTime,
    /// When the result is back at the submitter (`t_end` plus return delay).
    pub t_result: SimTime,
}

impl InferenceJob {
    pub const CSV_HEADER: &'static str =
        "job_id,analytic,frame_seq,resource,t_submit_ms,t_start_ms,t_end_ms,latency_ms";

    pub fn latency(&self) -> SimTime {
        self.t_result - self.t_submit
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.job_id,
            self.analytic,
            self.frame_seq.map(|s| s.to_string()).unwrap_or_default(),
            self.resource_id,
            self.t_submit.fmt_ms(),
            self.t_start.fmt_ms(),
            self.t_end.fmt_ms(),
            self.latency().fmt_ms()
        )
    }
}

/// Writes the latency log in submission order.
pub fn write_job_log(mut w: impl Write, jobs: &[InferenceJob]) -> std::io::Result<()> {
    writeln!(w, "{}", InferenceJob::CSV_HEADER)?;
    for job in jobs {
        writeln!(w, "{}", job.csv_row())?;
    }
    Ok(())
}

/// Read-only snapshot returned by [`ComputeHandle::properties`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeProperties {
    pub id: String,
    pub kind: ComputeKind,
    pub capacity: u32,
    pub service_times: BTreeMap<String, f64>,
    pub network_delay_ms: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
}

struct ResourceState {
    busy_until: Vec<SimTime>,
    starts: VecDeque<SimTime>,
    jitter: Option<(f64, ChaCha8Rng)>,
}

enum Body {
    Resource(Box<Mutex<ResourceState>>),
    Scheduler {
        members: Vec<ComputeHandle>,
        policy: Mutex<Policy>,
        jobs: AtomicU64,
    },
}

struct Node {
    spec: ComputeSpec,
    sim: Simulation,
    body: Body,
}

/// Shared handle to an edge, cloud or scheduler resource.
#[derive(Clone)]
pub struct ComputeHandle(Arc<Node>);

impl fmt::Debug for ComputeHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComputeHandle")
            .field("id", &self.0.spec.id)
            .field("kind", &self.0.spec.kind)
            .finish()
    }
}

impl PartialEq for ComputeHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

fn stable_hash(s: &str) -> u64 {
    // FNV-1a; only needs to be stable across runs.
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl ComputeHandle {
    pub(crate) fn resource(spec: ComputeSpec, sim: Simulation) -> Self {
        assert_ne!(spec.kind, ComputeKind::Scheduler);
        let slots = spec.capacity.max(1) as usize;
        Self(Arc::new(Node {
            body: Body::Resource(Box::new(Mutex::new(ResourceState {
                busy_until: vec![SimTime::ZERO; slots],
                starts: VecDeque::new(),
                jitter: None,
            }))),
            spec,
            sim,
        }))
    }

    pub(crate) fn scheduler(spec: ComputeSpec, members: Vec<ComputeHandle>, sim: Simulation) -> Result<Self> {
        let policy: Policy = spec
            .policy
            .as_deref()
            .unwrap_or("")
            .parse()
            .map_err(DaasError::Validation)?;
        Ok(Self(Arc::new(Node {
            body: Body::Scheduler {
                members,
                policy: Mutex::new(policy),
                jobs: AtomicU64::new(0),
            },
            spec,
            sim,
        })))
    }

    pub fn id(&self) -> &str {
        &self.0.spec.id
    }

    pub(crate) fn sim(&self) -> &Simulation {
        &self.0.sim
    }

    pub fn kind(&self) -> ComputeKind {
        self.0.spec.kind
    }

    pub fn network_delay(&self) -> SimTime {
        SimTime::from_millis_f64(self.0.spec.network_delay_ms)
    }

    pub fn members(&self) -> &[ComputeHandle] {
        match &self.0.body {
            Body::Scheduler { members, .. } => members,
            Body::Resource(_) => &[],
        }
    }

    pub fn policy(&self) -> Option<Policy> {
        match &self.0.body {
            Body::Scheduler { policy, .. } => Some(*policy.lock()),
            Body::Resource(_) => None,
        }
    }

    /// Replaces a scheduler's policy after checking its members support it.
    pub fn set_policy(&self, new: Policy) -> Result<()> {
        match &self.0.body {
            Body::Scheduler { members, policy, .. } => {
                let kinds: Vec<_> = members.iter().map(|m| m.kind()).collect();
                new.check_members(&kinds)
                    .map_err(|e| DaasError::Validation(format!("scheduler `{}`: {e}", self.id())))?;
                *policy.lock() = new;
                Ok(())
            }
            Body::Resource(_) => Err(DaasError::InvalidArgument(format!(
                "`{}` is not a scheduler",
                self.id()
            ))),
        }
    }

    /// Enables uniform ±`fraction` service-time jitter drawn from the root seed.
    pub fn set_jitter(&self, fraction: Option<f64>) {
        if let Body::Resource(state) = &self.0.body {
            let seed = self.0.sim.seed() ^ stable_hash(self.id());
            state.lock().jitter = fraction.map(|f| (f.abs(), ChaCha8Rng::seed_from_u64(seed)));
        }
    }

    pub fn properties(&self) -> ComputeProperties {
        let spec = &self.0.spec;
        ComputeProperties {
            id: spec.id.clone(),
            kind: spec.kind,
            capacity: spec.capacity,
            service_times: spec.service_times.clone(),
            network_delay_ms: spec.network_delay_ms,
            members: self.members().iter().map(|m| m.id().to_string()).collect(),
            policy: self.policy().map(|p| p.name().to_string()),
        }
    }

    /// Configured service time on a concrete resource.
    pub fn service_time(&self, analytic: &str) -> Option<SimTime> {
        self.0
            .spec
            .service_times
            .get(analytic)
            .map(|&ms| SimTime::from_millis_f64(ms))
    }

    /// Whether `analytic` can run here (on every member, for schedulers).
    pub fn supports(&self, analytic: &str) -> bool {
        match &self.0.body {
            Body::Resource(_) => self.service_time(analytic).is_some(),
            Body::Scheduler { members, .. } => members.iter().all(|m| m.supports(analytic)),
        }
    }

    /// Time until the earliest slot frees up, seen from `at`.
    pub fn queue_wait(&self, at: SimTime) -> SimTime {
        match &self.0.body {
            Body::Resource(state) => {
                let st = state.lock();
                st.busy_until
                    .iter()
                    .min()
                    .copied()
                    .unwrap_or(SimTime::ZERO)
                    .saturating_sub(at)
            }
            Body::Scheduler { .. } => SimTime::ZERO,
        }
    }

    /// Jobs assigned but not yet started at `at`.
    pub fn queue_len(&self, at: SimTime) -> usize {
        match &self.0.body {
            Body::Resource(state) => state.lock().starts.iter().filter(|&&s| s > at).count(),
            Body::Scheduler { members, .. } => members.iter().map(|m| m.queue_len(at)).sum(),
        }
    }

    pub fn estimate(&self, analytic: &str, at: SimTime) -> Option<MemberEstimate> {
        Some(MemberEstimate {
            kind: self.kind(),
            network_delay: self.network_delay(),
            queue_wait: self.queue_wait(at),
            service_time: self.service_time(analytic)?,
        })
    }

    /// Submits a job at the current simulation time.
    pub fn submit(&self, analytic: &str, frame_seq: Option<u64>) -> Result<InferenceJob> {
        self.submit_at(analytic, frame_seq, self.0.sim.now())
    }

    /// Queues a job submitted at `t_submit` and returns its full timeline.
    /// Submissions must arrive in non-decreasing `t_submit` order.
    pub fn submit_at(
        &self,
        analytic: &str,
        frame_seq: Option<u64>,
        t_submit: SimTime,
    ) -> Result<InferenceJob> {
        match &self.0.body {
            Body::Resource(state) => {
                let service = self.service_time(analytic).ok_or_else(|| {
                    DaasError::MissingServiceTime {
                        analytic: analytic.into(),
                        target: self.id().into(),
                    }
                })?;
                let net = self.network_delay();
                let mut st = state.lock();
                let service = match &mut st.jitter {
                    Some((frac, rng)) if *frac > 0.0 => {
                        let f: f64 = rng.gen_range(-*frac..=*frac);
                        SimTime::from_micros(((service.as_micros() as f64) * (1.0 + f)).round() as u64)
                    }
                    _ => service,
                };
                let (slot, free_at) = st
                    .busy_until
                    .iter()
                    .copied()
                    .enumerate()
                    .min_by_key(|&(i, t)| (t, i))
                    .expect("at least one slot");
                let t_start = (t_submit + net).max(free_at);
                let t_end = t_start + service;
                st.busy_until[slot] = t_end;
                while st.starts.front().is_some_and(|&s| s <= t_submit) {
                    st.starts.pop_front();
                }
                st.starts.push_back(t_start);
                drop(st);
                let job = InferenceJob {
                    job_id: self.0.sim.next_id(),
                    analytic: analytic.into(),
                    frame_seq,
                    resource_id: self.id().into(),
                    t_submit,
                    t_start,
                    t_end,
                    t_result: t_end + net,
                };
                self.0.sim.journal().jobs.lock().push(job.clone());
                Ok(job)
            }
            Body::Scheduler {
                members,
                policy,
                jobs,
            } => {
                let estimates = members
                    .iter()
                    .map(|m| {
                        m.estimate(analytic, t_submit).ok_or_else(|| {
                            DaasError::MissingServiceTime {
                                analytic: analytic.into(),
                                target: m.id().into(),
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let index = jobs.fetch_add(1, Ordering::Relaxed);
                let chosen = schedule(*policy.lock(), index, &estimates);
                members[chosen].submit_at(analytic, frame_seq, t_submit)
            }
        }
    }
}

/// Binding of an analytic to a compute target.
#[derive(Debug, Clone)]
pub struct DeploymentHandle {
    analytic: String,
    target: ComputeHandle,
}

impl DeploymentHandle {
    pub fn analytic(&self) -> &str {
        &self.analytic
    }

    pub fn target(&self) -> &ComputeHandle {
        &self.target
    }

    pub fn submit(&self, frame_seq: Option<u64>) -> Result<InferenceJob> {
        self.target.submit(&self.analytic, frame_seq)
    }
}

/// Binds `analytic` to `target`, failing if the target has no service time
/// for it.
pub fn deploy(analytic: &str, target: &ComputeHandle) -> Result<DeploymentHandle> {
    if !target.supports(analytic) {
        return Err(DaasError::MissingServiceTime {
            analytic: analytic.into(),
            target: target.id().into(),
        });
    }
    Ok(DeploymentHandle {
        analytic: analytic.into(),
        target: target.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str, kind: ComputeKind, svc: f64, net: f64, capacity: u32) -> ComputeSpec {
        ComputeSpec {
            id: id.into(),
            kind,
            service_times: [("vip_detect".to_string(), svc)].into(),
            capacity,
            network_delay_ms: net,
            members: vec![],
            policy: None,
        }
    }

    fn edge_cloud(sim: &Simulation, policy: &str) -> (ComputeHandle, ComputeHandle, ComputeHandle) {
        let edge = ComputeHandle::resource(spec("edge", ComputeKind::Edge, 50.0, 0.0, 1), sim.clone());
        let cloud = ComputeHandle::resource(spec("cloud", ComputeKind::Cloud, 275.0, 25.0, 4), sim.clone());
        let sched = ComputeHandle::scheduler(
            ComputeSpec {
                id: "edge_cloud".into(),
                kind: ComputeKind::Scheduler,
                service_times: BTreeMap::new(),
                capacity: 1,
                network_delay_ms: 0.0,
                members: vec!["edge".into(), "cloud".into()],
                policy: Some(policy.into()),
            },
            vec![edge.clone(), cloud.clone()],
            sim.clone(),
        )
        .unwrap();
        (edge, cloud, sched)
    }

    #[test]
    fn idle_edge_latency_is_service_time() {
        let sim = Simulation::new(0);
        let (edge, _, _) = edge_cloud(&sim, "edge-only");
        let job = edge.submit("vip_detect", None).unwrap();
        assert_eq!(job.latency(), SimTime::from_millis(50));
    }

    #[test]
    fn idle_cloud_latency_includes_both_network_legs() {
        let sim = Simulation::new(0);
        let (_, cloud, _) = edge_cloud(&sim, "edge-only");
        let job = cloud.submit("vip_detect", Some(3)).unwrap();
        assert_eq!(job.t_start, SimTime::from_millis(25));
        assert_eq!(job.t_end, SimTime::from_millis(300));
        assert_eq!(job.latency(), SimTime::from_millis(325));
    }

    #[test]
    fn queued_edge_job_waits_for_predecessors() {
        let sim = Simulation::new(0);
        let (edge, _, _) = edge_cloud(&sim, "edge-only");
        edge.submit("vip_detect", None).unwrap();
        edge.submit("vip_detect", None).unwrap();
        assert_eq!(edge.queue_len(SimTime::ZERO), 1);
        let third = edge.submit("vip_detect", None).unwrap();
        assert_eq!(third.latency(), SimTime::from_millis(150));
    }

    #[test]
    fn scheduler_routes_by_queue_estimate() {
        let sim = Simulation::new(0);
        let (edge, _, sched) = edge_cloud(&sim, "queue-aware");
        for _ in 0..3 {
            edge.submit("vip_detect", None).unwrap();
        }
        assert_eq!(sched.submit("vip_detect", None).unwrap().resource_id, "edge");
        for _ in 0..3 {
            edge.submit("vip_detect", None).unwrap();
        }
        // edge now has 7 jobs worth of backlog: 350 + 50 > 325
        assert_eq!(sched.submit("vip_detect", None).unwrap().resource_id, "cloud");
    }

    #[test]
    fn deploy_requires_service_time_everywhere() {
        let sim = Simulation::new(0);
        let (edge, _, sched) = edge_cloud(&sim, "ec");
        assert!(deploy("vip_detect", &sched).is_ok());
        assert!(matches!(
            deploy("body_pose", &edge),
            Err(DaasError::MissingServiceTime { .. })
        ));
    }

    #[test]
    fn properties_snapshot() {
        let sim = Simulation::new(0);
        let (edge, cloud, sched) = edge_cloud(&sim, "queue-aware");
        assert_eq!(edge.properties().service_times["vip_detect"], 50.0);
        assert_eq!(cloud.properties().network_delay_ms, 25.0);
        let p = sched.properties();
        assert_eq!(p.members, vec!["edge", "cloud"]);
        assert_eq!(p.policy.as_deref(), Some("queue-aware"));
    }

    #[test]
    fn set_policy_validates_members() {
        let sim = Simulation::new(0);
        let (edge, _, sched) = edge_cloud(&sim, "ec");
        sched.set_policy(Policy::CloudOnly).unwrap();
        assert_eq!(sched.policy(), Some(Policy::CloudOnly));
        assert!(edge.set_policy(Policy::EdgeOnly).is_err());
    }

    #[test]
    fn jitter_is_seeded_and_bounded() {
        let run = || {
            let sim = Simulation::new(42);
            let (edge, _, _) = edge_cloud(&sim, "ec");
            edge.set_jitter(Some(0.1));
            (0..20)
                .map(|i| {
                    edge.submit_at("vip_detect", None, SimTime::from_secs(i)).unwrap().latency()
                })
                .collect::<Vec<_>>()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a
            .iter()
            .all(|l| (45_000..=55_000).contains(&l.as_micros())));
        assert!(a.iter().any(|l| l.as_micros() != 50_000));
    }
}
