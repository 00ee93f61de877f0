//! Application topology: recorded while an application composes itself,
//! validated into an [`ApplicationGraph`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use serde_json::Value;

use crate::compute::ComputeHandle;
use crate::drone::RobotHandle;
use crate::env::Environment;
use crate::error::{DaasError, Result};
use crate::sim::Simulation;

/// Node role; the declaration order is the launch order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Compute,
    Sensor,
    Analytic,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDesc {
    pub name: String,
    pub role: Role,
    /// Compute resource an analytic is deployed on.
    pub binding: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Value>,
}

impl NodeDesc {
    pub fn new(name: impl Into<String>, role: Role) -> Self {
        Self {
            name: name.into(),
            role,
            binding: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            params: BTreeMap::new(),
        }
    }
}

/// Unvalidated topology description.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AppDescription {
    pub nodes: Vec<NodeDesc>,
}

impl AppDescription {
    pub fn node(&self, name: &str) -> Option<&NodeDesc> {
        self.nodes.iter().find(|n| n.name == name)
    }
}

/// Collects nodes as the public API is used.
#[derive(Debug, Default)]
pub struct GraphRecorder {
    nodes: Vec<NodeDesc>,
    used_names: BTreeMap<String, usize>,
}

impl GraphRecorder {
    fn position(&self, name: &str, role: Role) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name && n.role == role)
    }

    pub(crate) fn sensor(&mut self, id: &str) {
        if self.position(id, Role::Sensor).is_none() {
            let mut n = NodeDesc::new(id, Role::Sensor);
            n.outputs.push(id.to_string());
            self.nodes.push(n);
        }
    }

    fn compute(&mut self, c: &ComputeHandle) {
        if self.position(c.id(), Role::Compute).is_some() {
            return;
        }
        let mut n = NodeDesc::new(c.id(), Role::Compute);
        n.params.insert("kind".into(), c.kind().as_str().into());
        if let Some(p) = c.policy() {
            n.params.insert("policy".into(), p.label().into());
            let members: Vec<Value> = c.members().iter().map(|m| m.id().into()).collect();
            n.params.insert("members".into(), members.into());
        }
        self.nodes.push(n);
    }

    /// Registers an analytic instance and returns its unique node name, which
    /// doubles as the name of its output channel.
    pub(crate) fn analytic(&mut self, base: &str, binding: &ComputeHandle, input: &str) -> String {
        let count = self.used_names.entry(base.to_string()).or_insert(0);
        *count += 1;
        let name = if *count == 1 {
            base.to_string()
        } else {
            format!("{base}_{count}")
        };
        self.compute(binding);
        let mut n = NodeDesc::new(name.clone(), Role::Analytic);
        n.binding = Some(binding.id().to_string());
        n.inputs.push(input.to_string());
        n.outputs.push(name.clone());
        self.nodes.push(n);
        name
    }

    pub(crate) fn robot(&mut self, id: &str, inputs: &[String], waypoints: Option<usize>) {
        let i = match self.position(id, Role::Robot) {
            Some(i) => i,
            None => {
                self.nodes.push(NodeDesc::new(id, Role::Robot));
                self.nodes.len() - 1
            }
        };
        let n = &mut self.nodes[i];
        n.inputs.extend(inputs.iter().cloned());
        if !inputs.is_empty() {
            let priorities: Value = inputs
                .iter()
                .enumerate()
                .map(|(p, name)| (name.clone(), Value::from(p)))
                .collect::<serde_json::Map<_, _>>()
                .into();
            n.params.insert("priorities".into(), priorities);
        }
        if let Some(w) = waypoints {
            let prev = n.params.get("waypoints").and_then(Value::as_u64).unwrap_or(0);
            n.params.insert("waypoints".into(), (prev + w as u64).into());
        }
    }

    pub fn snapshot(&self) -> AppDescription {
        AppDescription {
            nodes: self.nodes.clone(),
        }
    }
}

/// A validated application, ready to run.
#[derive(Debug, Clone)]
pub struct ApplicationGraph {
    description: AppDescription,
    robots: Vec<RobotHandle>,
    sim: Simulation,
}

impl ApplicationGraph {
    /// Nodes in launch order.
    pub fn nodes(&self) -> &[NodeDesc] {
        &self.description.nodes
    }

    pub fn description(&self) -> &AppDescription {
        &self.description
    }

    pub fn robots(&self) -> &[RobotHandle] {
        &self.robots
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    /// `(channel, priority)` pairs feeding `robot`.
    pub fn navigation_sources(&self, robot: &str) -> Vec<(String, u32)> {
        self.description
            .nodes
            .iter()
            .find(|n| n.role == Role::Robot && n.name == robot)
            .map(|n| {
                n.inputs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.clone(), i as u32))
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Validates a description against `env` and orders it for launch.
pub fn build_graph(env: &Environment, desc: AppDescription) -> Result<ApplicationGraph> {
    let dangling = |what: String| Err(DaasError::Graph(format!("dangling reference: {what}")));
    let mut names = BTreeSet::new();
    for n in &desc.nodes {
        if !names.insert(n.name.as_str()) {
            return Err(DaasError::Graph(format!("duplicate node `{}`", n.name)));
        }
    }

    let sensor_exists = |id: &str| {
        env.get_env_sensor_by_id(id).is_ok()
            || env
                .get_env_robots()
                .iter()
                .any(|r| r.is_robot_sensor_available(id))
    };
    let mut robots = Vec::new();
    for n in &desc.nodes {
        match n.role {
            Role::Analytic => {
                let Some(b) = &n.binding else {
                    return Err(DaasError::Validation(format!(
                        "analytic `{}` has no deployment",
                        n.name
                    )));
                };
                if env.get_compute_resource_by_id(b).is_err() {
                    return dangling(format!("analytic `{}` bound to unknown compute `{b}`", n.name));
                }
            }
            Role::Sensor if !sensor_exists(&n.name) => {
                return dangling(format!("unknown sensor `{}`", n.name));
            }
            Role::Compute if env.get_compute_resource_by_id(&n.name).is_err() => {
                return dangling(format!("unknown compute `{}`", n.name));
            }
            Role::Robot => match env.get_robot_by_id(&n.name) {
                Ok(r) => robots.push(r),
                Err(_) => return dangling(format!("unknown robot `{}`", n.name)),
            },
            _ => {}
        }
    }

    let mut producer: BTreeMap<&str, &str> = BTreeMap::new();
    for n in &desc.nodes {
        for out in &n.outputs {
            if let Some(other) = producer.insert(out, &n.name) {
                return Err(DaasError::Graph(format!(
                    "channel `{out}` produced by both `{other}` and `{}`",
                    n.name
                )));
            }
        }
    }
    for n in &desc.nodes {
        for input in &n.inputs {
            if !producer.contains_key(input.as_str()) {
                return dangling(format!("`{}` consumes unknown channel `{input}`", n.name));
            }
        }
    }
    check_acyclic(&desc, &producer)?;

    // every binding target becomes a compute node
    let mut nodes = desc.nodes.clone();
    for n in &desc.nodes {
        if let Some(b) = &n.binding {
            if !nodes.iter().any(|m| m.role == Role::Compute && &m.name == b) {
                nodes.push(NodeDesc::new(b.clone(), Role::Compute));
            }
        }
    }
    let decl_order = |n: &NodeDesc| {
        env.get_compute_resources()
            .iter()
            .position(|c| c.id() == n.name)
            .unwrap_or(usize::MAX)
    };
    // stable: within a role, recording order; compute follows the config
    nodes.sort_by_key(|n| (n.role, if n.role == Role::Compute { decl_order(n) } else { 0 }));

    Ok(ApplicationGraph {
        description: AppDescription { nodes },
        robots,
        sim: env.simulation().clone(),
    })
}

fn check_acyclic(desc: &AppDescription, producer: &BTreeMap<&str, &str>) -> Result<()> {
    let mut indegree: BTreeMap<&str, usize> =
        desc.nodes.iter().map(|n| (n.name.as_str(), 0)).collect();
    let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &desc.nodes {
        for input in &n.inputs {
            let from = producer[input.as_str()];
            edges.entry(from).or_default().push(&n.name);
            *indegree.get_mut(n.name.as_str()).expect("node indexed") += 1;
        }
    }
    let mut ready: VecDeque<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut seen = 0;
    while let Some(n) = ready.pop_front() {
        seen += 1;
        for &m in edges.get(n).into_iter().flatten() {
            let d = indegree.get_mut(m).expect("node indexed");
            *d -= 1;
            if *d == 0 {
                ready.push_back(m);
            }
        }
    }
    if seen != desc.nodes.len() {
        return Err(DaasError::Graph("application graph has a cycle".into()));
    }
    Ok(())
}
