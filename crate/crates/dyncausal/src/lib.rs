//! Inference of time-varying Granger-causal networks from non-stationary
//! multivariate time series.
//!
//! The model is a restricted piecewise VAR(p): each node is predicted from
//! the lags of the *other* nodes, with coefficients constant on blocks
//! between change points. Change points are found by penalized dynamic
//! programming over recursive partitions (dyadic or general), and the
//! neighborhood of each node within a block is selected by a group lasso
//! whose penalty level has a finite-sample Type-I-error calibration.
//!
//! Quick tour:
//!
//! - [`timeseries`]: the observed panel, CSV I/O, differencing, lagged
//!   design matrices.
//! - [`glasso`]: the group-lasso solver, KKT certification, and the
//!   `lambda(alpha)` calibration with its chi-square quantile machinery.
//! - [`partition`]: per-interval scores and the two partition searches.
//! - [`network`]: per-node neighborhoods assembled into a time-indexed
//!   directed graph, plus the JSON result document.
//! - [`simulate`]: benchmark process generators and study scoring.
//! - [`cli`]: the command-line front end (`simulate`, `infer`, `study`).
//!
//! See the crate examples for runnable walkthroughs of each capability.

#![forbid(unsafe_code)]

pub mod cli;
pub mod config;
pub mod error;
pub mod glasso;
pub mod network;
pub mod partition;
pub mod simulate;
pub mod timeseries;

pub use config::{CountScale, InferenceConfig, LambdaConfig, LambdaScale, Method, PenaltyConfig};
pub use error::{Error, Result};
pub use glasso::{
    chi2_quantile, fit_group_lasso, kkt_check, lambda_alpha, FitOutcome, GroupCoefficients,
    SolverConfig,
};
pub use network::{
    infer_neighborhood, infer_network, DynamicNetwork, Edge, NeighborhoodModel, NetworkDocument,
};
pub use partition::{
    block_score, rdp_search, rp_search, total_penalty, BlockFit, PartitionResult,
};
pub use simulate::{
    model_a, model_a_with_len, model_b, model_b_scaled, model_b_scaled_with_len,
    model_b_with_len, model_c, model_c_with_len, run_study, score_trial, simulate,
    GeneratorSpec, TrialReport, TrialScore,
};
pub use timeseries::{
    build_lagged_design, first_difference, load_csv, Interval, LaggedDesign, MultivariateSeries,
};
