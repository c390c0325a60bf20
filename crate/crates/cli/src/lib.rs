//! Command-line front end: JSON config in, JSON report out.

pub mod commands;
pub mod config;
pub mod report;
