//! Command-line plumbing for the `exobasin` experiments.

pub mod config;
pub mod repro;
