//! Experiment harness for the radial blow-up laboratory: configuration,
//! artifact persistence, the acceptance battery, and the CLI surface.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod rng;
pub mod run;
pub mod suite;
