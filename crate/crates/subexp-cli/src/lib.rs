//! Scenario loading, report schemas, and subcommand orchestration behind
//! the `subexp` binary. Kept as a library so integration tests can parse
//! emitted artifacts with the exact schema the binary uses.

pub mod reports;
pub mod runner;
pub mod scenario;

/// Binary name, as recorded in reports and manifests.
pub const TOOL_NAME: &str = "subexp";

pub use runner::{execute, CliError, Manifest, RunRequest, Task};
pub use scenario::{Scenario, ScenarioError};
