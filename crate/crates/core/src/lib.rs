//! Spatial allocative-efficiency metrics for basketball lineups.
//!
//! The crate turns shot-chart and play-by-play files (or a synthetic season)
//! into per-cell shooting surfaces and measures how well a five-player lineup
//! distributes its attempts among its shooters:
//!
//! - [`court`]: the 50 x 47 ft half-court lattice, point values, region partitions.
//! - [`ingest`]: CSV parsing, lineup stint reconstruction, shot/lineup joins.
//! - [`surfaces`]: FG% posteriors (pluggable estimator backends) and FGA-per-36
//!   surfaces (pluggable smoothers).
//! - [`metrics`]: rank surfaces, rank correspondence, lineup points lost (LPL)
//!   and player LPL contribution (PLC).
//! - [`inference`]: permutation test, game-level LPL and the score regression.
//! - [`synth`]: synthetic seasons with known ground truth plus brute-force oracles.
//! - [`pipeline`]: the command implementations behind the `courtalloc` binary.

pub mod court;
pub mod error;
pub mod ids;
pub mod inference;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod surfaces;
pub mod synth;

pub use error::{Error, Result};
