//! Declarative deployment plan: the services an application needs and the
//! order to start them in.

use serde::Serialize;

use super::graph::{ApplicationGraph, NodeDesc};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeploymentPlan {
    pub services: Vec<NodeDesc>,
    pub launch_order: Vec<String>,
}

impl DeploymentPlan {
    /// Pretty JSON with a trailing newline; key order is fixed.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn service_names(&self) -> Vec<&str> {
        self.services.iter().map(|s| s.name.as_str()).collect()
    }
}

pub fn emit_plan(graph: &ApplicationGraph) -> DeploymentPlan {
    let services = graph.nodes().to_vec();
    let launch_order = services.iter().map(|s| s.name.clone()).collect();
    DeploymentPlan {
        services,
        launch_order,
    }
}
