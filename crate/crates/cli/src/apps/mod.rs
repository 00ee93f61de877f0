//! The bundled applications. Each `compose` wires one application against
//! an environment using only the public API; the runner does the rest.

pub mod situation_awareness;
pub mod survey;
pub mod vip_follow;
pub mod wildfire;

use daas_core::{Environment, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum App {
    VipFollow,
    SituationAwareness,
    Survey,
    Wildfire,
}

impl App {
    pub const ALL: [App; 4] = [
        App::VipFollow,
        App::SituationAwareness,
        App::Survey,
        App::Wildfire,
    ];

    pub fn name(self) -> &'static str {
        match self {
            App::VipFollow => "vip-follow",
            App::SituationAwareness => "situation-awareness",
            App::Survey => "survey",
            App::Wildfire => "wildfire",
        }
    }

    pub fn compose(self, env: &Environment) -> Result<()> {
        match self {
            App::VipFollow => vip_follow::compose(env),
            App::SituationAwareness => situation_awareness::compose(env),
            App::Survey => survey::compose(env),
            App::Wildfire => wildfire::compose(env),
        }
    }

    /// Bundled configuration, relative to the repository root.
    pub fn default_config(self) -> &'static str {
        match self {
            App::VipFollow | App::SituationAwareness => "configs/tello.json",
            App::Survey => "configs/farm.json",
            App::Wildfire => "configs/wildfire.json",
        }
    }

    /// Whether the app follows a subject and so flies in gusty air by default.
    pub fn follows_subject(self) -> bool {
        matches!(self, App::VipFollow | App::SituationAwareness)
    }

    pub fn source(self) -> &'static str {
        match self {
            App::VipFollow => include_str!("vip_follow.rs"),
            App::SituationAwareness => include_str!("situation_awareness.rs"),
            App::Survey => include_str!("survey.rs"),
            App::Wildfire => include_str!("wildfire.rs"),
        }
    }
}
