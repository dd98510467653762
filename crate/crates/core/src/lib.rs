//! LEO constellation topology simulator: Walker-style shells, +Grid
//! inter-satellite links, per-second shortest-path routing between cities
//! and latency/stability metrics over the run.

pub mod constellation;
pub mod error;
pub mod experiment;
pub mod geo;
pub mod metrics;
pub mod routing;
pub mod topology;
pub mod traffic;

pub use error::{Error, Result};
