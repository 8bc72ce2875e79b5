//! Simulation harness and file formats for `polysel-core`.
//!
//! - [`config`]: the JSON configuration shared by all subcommands.
//! - [`sim`]: seeded random streams, designs and responses.
//! - [`experiments`]: length curves, quantile floors, the certificate
//!   heatmap, the length-quantile study, coverage checks and one-shot
//!   intervals.
//! - [`stats`]: empirical quantiles and the reciprocal curve fit.
//! - [`io`]: CSV tables and `manifest.json`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod sim;
pub mod stats;

pub use config::{Config, ScenarioConfig};
pub use error::{HarnessError, Result};
