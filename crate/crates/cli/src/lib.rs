//! Command-line driver for `gchaos-core`: JSON configuration, verification
//! suites, convergence studies and report files.

#![forbid(unsafe_code)]

mod chaos;
pub mod config;
pub mod export;
pub mod report;
pub mod sampler;
pub mod suites;

pub use chaos::{chaos_sweep, relative, ChaosSweep, Order, OrderStats, SampleMoments};
pub use config::{parse_config, ConfigError, FDescriptor, Format, RunConfig, ScenarioEntry, Thresholds};
pub use report::{Cell, Check, Report, Table, REPORT_VERSION};
pub use sampler::Parallel;
pub use suites::{run_convergence, run_expectation, run_gheat, run_hermite_table, run_verify};
