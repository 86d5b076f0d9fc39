//! Command implementations shared by the CLI and the end-to-end tests. Each
//! command reads its inputs from a [`RunConfig`] and writes into its output
//! directory atomically.

mod analysis;
mod config;
mod data;
mod regress;
mod report;

pub use analysis::{
    cmd_metrics, cmd_permtest, cmd_surfaces, file_stem, Histogram, LineupSurfaces, LineupTotals, SurfaceBuilder,
};
pub use config::{McmcSettings, RunConfig};
pub use data::{
    cmd_ingest, load_ingested, select_lineups, IngestDiagnostics, Ingested, LineupEntry, DIAGNOSTICS_FILE,
    GAMES_FILE, LINEUPS_FILE, LINEUP_SHOTS_FILE, REPLACEMENT_FILE, SEASON_WEIGHTS_FILE, STINTS_FILE,
};
pub use regress::{cmd_regress, game_level_records, RegressReport};
pub use report::{cmd_render, cmd_synth};
