//! Runner for the bundled applications: argument handling, output files and
//! the statement-count audit.

pub mod apps;
pub mod loc_audit;
pub mod report;
pub mod runner;

pub use apps::App;
pub use runner::{execute, RunOutcome, RunRequest, ServiceOverride};
