//! Command-line pipeline, file formats and reports for `essr-core`.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod export;
pub mod pipeline;
pub mod report;
