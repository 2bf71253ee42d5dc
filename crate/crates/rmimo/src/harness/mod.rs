//! Scenario orchestration: configuration, Monte Carlo experiments,
//! aggregation, CSV emission, and the command-line interface.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;

pub use cli::cli_main;
pub use config::{Fig1Config, Preset, ScenarioConfig, SearchSettings};
pub use experiments::{
    aggregate_cdf, bin_by_region, round_robin_schedule, run_fig1, run_multiuser, run_user_sweep,
    Fig1Row, Region, RegionSummary, TrialRecord,
};
