//! File-based pipeline around `pavl-core`: sweep configuration, parallel
//! simulation, CSV schemas, fitting and Pareto stages, and the summary report.

pub mod config;
pub mod csvio;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod sweep;

pub use error::{Error, Result};
