//! Monte Carlo harness measuring how many reduced samples each distinguisher
//! needs.
//!
//! A trial draws an instance with a noise-shaped secret, optionally amplifies
//! it from triples, applies `t` BKW steps, shuffles the reduced set with the
//! trial's stream and then looks for the shortest prefix on which the
//! distinguisher ranks the true `k` positions first. Trial `i` of point `p`
//! draws everything from stream `i` of `splitmix64(master_seed + p)`, so the
//! CSV is a function of the config alone.

mod config;
mod runner;
mod search;

pub use config::{
    preset, BoundPolicy, ExperimentConfig, Lf2Sizing, Point, PointPlan, SecretMode, PRESETS,
    PROTOCOL_TRIALS,
};
pub use runner::{
    median, parse_csv, point_seed, prepare_trial, records_to_csv, run_experiment, run_point,
    run_trial, ExperimentRecord, ExperimentResult, PointResult, PointSummary, TrialOutcome,
    CSV_HEADER,
};
pub use search::{first_success, min_samples_to_success, run_distinguisher};
