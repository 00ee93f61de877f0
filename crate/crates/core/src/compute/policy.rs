//! Placement policies for scheduler resources.

use std::fmt;
use std::str::FromStr;

use crate::config::ComputeKind;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    EdgeOnly,
    CloudOnly,
    /// Alternates members per job.
    RoundRobinEC,
    /// Greedy minimum estimated completion, ties to the edge.
    QueueAware,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::EdgeOnly,
        Policy::CloudOnly,
        Policy::RoundRobinEC,
        Policy::QueueAware,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::EdgeOnly => "edge-only",
            Policy::CloudOnly => "cloud-only",
            Policy::RoundRobinEC => "ec",
            Policy::QueueAware => "queue-aware",
        }
    }

    /// Human-facing label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Policy::QueueAware => "queue-aware (DEMS-like)",
            other => other.name(),
        }
    }

    pub fn names() -> String {
        Self::ALL.map(Policy::name).join(", ")
    }

    pub fn check_members(self, kinds: &[ComputeKind]) -> Result<(), String> {
        if kinds.is_empty() {
            return Err("scheduler has no members".into());
        }
        let needs = match self {
            Policy::EdgeOnly => Some(ComputeKind::Edge),
            Policy::CloudOnly => Some(ComputeKind::Cloud),
            _ => None,
        };
        match needs {
            Some(kind) if !kinds.contains(&kind) => Err(format!(
                "policy {} requires a {} member",
                self.name(),
                kind.as_str()
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown scheduler policy `{s}` (valid: {})", Policy::names()))
    }
}

/// What a scheduler knows about one member when placing a job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberEstimate {
    pub kind: ComputeKind,
    pub network_delay: SimTime,
    pub queue_wait: SimTime,
    pub service_time: SimTime,
}

impl MemberEstimate {
    pub fn estimated_completion(&self) -> SimTime {
        self.network_delay + self.network_delay + self.queue_wait + self.service_time
    }
}

/// Index of the member that should run job number `job_index`.
///
/// Members must already satisfy [`Policy::check_members`].
pub fn schedule(policy: Policy, job_index: u64, members: &[MemberEstimate]) -> usize {
    let first_of = |kind| {
        members
            .iter()
            .position(|m| m.kind == kind)
            .expect("policy members validated at load")
    };
    match policy {
        Policy::EdgeOnly => first_of(ComputeKind::Edge),
        Policy::CloudOnly => first_of(ComputeKind::Cloud),
        Policy::RoundRobinEC => (job_index % members.len() as u64) as usize,
        Policy::QueueAware => members
            .iter()
            .enumerate()
            .min_by_key(|(i, m)| (m.estimated_completion(), m.kind != ComputeKind::Edge, *i))
            .map(|(i, _)| i)
            .expect("non-empty members"),
    }
}
