//! Command-line front end: `analyze`, `verify`, `generate` and `fuzz`.

pub mod error;
pub mod fuzz;
pub mod pipeline;
pub mod report;
