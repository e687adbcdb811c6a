//! Monte Carlo experiments, configuration and brute-force oracles.

pub mod config;
pub mod experiment;
pub mod oracle;

pub use config::{build_process, family_name, CoderDescriptor, Estimator, ExperimentConfig};
pub use experiment::{
    entropy_upper_envelope_constant, fit_slope, mc_distortion, min_jump_size, rate_curve_experiment, write_csv,
    RateCoder, RateCurvePoint, CSV_HEADER,
};
pub use oracle::{
    brute_force_optimal_quantizer, oracle_cross_check, shifted_candidates, BruteForceResult, FinitePathLaw,
    OracleReport,
};
