//! Experiment driver for `twdm-core`: JSON configs, parameter sweeps, CSV
//! output, traces and the randomised verification suite.

pub mod bound;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod trace;
pub mod verify;
