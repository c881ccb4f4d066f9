//! Scenario runner and file formats on top of `pdcsim-core`.
//!
//! - [`config`]: JSON scenario documents
//! - [`scenario`]: evaluation, artifacts and the manifest
//! - [`fast`]: row-parallel and FFT evaluation of `G²` maps
//! - [`io`]: CSV and PGM output, object CSV input
//! - [`checks`]: analytic references used by the scenario checks

pub mod checks;
pub mod config;
pub mod fast;
pub mod io;
pub mod scenario;

pub use config::{ConfigError, ScenarioConfig};
pub use scenario::{resolve_out_dir, run, Manifest};
