//! Command-line front end: builds plans, verifies them, samples them and
//! emits figure data. The plan document schema lives in [`schema`].

pub mod commands;
pub mod config;
pub mod error;
pub mod params;
pub mod schema;

pub use config::{RunConfig, DEFAULT_SEED};
pub use error::{CliError, Result};
pub use schema::{PlanDocument, PLAN_SCHEMA};
