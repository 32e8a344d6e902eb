//! Experiment harness (configs, ensembles, reports).

pub mod config;
pub mod report;
pub mod run;
