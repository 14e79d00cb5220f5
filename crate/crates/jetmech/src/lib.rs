//! IO companion of `jetmech-core`: scenario config files, trajectory CSV,
//! JSON verification reports and the command-line interface.
//!
//! All JSON emitted here has sorted object keys and shortest round-trip
//! float formatting, so identical inputs produce byte-identical reports.

pub mod cli;
pub mod config;
pub mod report;
pub mod trajectory_csv;
