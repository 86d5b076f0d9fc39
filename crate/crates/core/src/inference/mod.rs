//! Inference on top of the lineup metrics: a Monte-Carlo permutation test of
//! allocative optimality, game-level region points lost, and a Bayesian
//! regression of team scores on those totals.

mod glpl;
mod permtest;
mod score_model;

pub use glpl::{game_records, glpl_regions, region_fgp, tglpl, GameLplRecord, GlplContext, LineupGlpl};
pub use permtest::{permutation_test, PermTestResult, DEFAULT_VARIATES};
pub use score_model::{
    fit_score_model, hpd_interval, parse_observations, points_lost, points_lost_summary, quantile,
    read_observations, split_rhat, sum_zero_basis, write_observations, ParamBlock, ParamSummary,
    PosteriorFile, ScoreModelConfig, ScoreModelPosterior, ScoreObservation, TeamPointsLost,
    RHAT_THRESHOLD,
};
