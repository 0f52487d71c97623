//! Experiment configs, scenario execution and result files for the
//! network simulator.

pub mod config;
pub mod runner;
pub mod scenarios;

pub use config::{
    load_config, parse_config, tuple_label, ConfigError, ExperimentConfig, ParamTuple, Scenario,
};
pub use runner::{
    run_experiment, CellOutcome, ExperimentOutput, MetricsRecord, RunOptions, CSV_HEADER,
};
