//! Command-line and HTTP front ends for the pattern engine.

pub mod query;
pub mod service;
