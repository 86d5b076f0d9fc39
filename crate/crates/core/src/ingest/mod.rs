//! Shot-chart and play-by-play ingestion.
//!
//! Shots and play-by-play arrive as CSV dumps. Play-by-play is replayed into
//! lineup stints (maximal intervals with a fixed on-court five), and each shot
//! is joined to the stint that contains its timestamp.

pub(crate) mod csvutil;
mod games;
mod join;
mod pbp;
mod shots;

pub use games::{parse_games, read_games, write_games, GameInfo};
pub use join::{
    flag_replacement_players, join_shots, JoinDiagnostics, JoinResult, LineupDataset,
    REPLACEMENT_THRESHOLD,
};
pub use pbp::{
    build_stints, parse_pbp, read_pbp, read_stints, write_pbp, write_stints, EventKind,
    FlaggedGame, LineupStint, PbpEvent, StintBuild,
};
pub use shots::{parse_shots, read_shots, write_shots, write_shots_tagged, ShotEvent};

/// Length of a period in seconds; overtimes last five minutes.
pub fn period_seconds(period: u32) -> f64 {
    if period <= 4 {
        720.0
    } else {
        300.0
    }
}

/// Seconds of game time elapsed at `(period, clock_remaining)`.
pub fn elapsed_seconds(period: u32, clock_remaining: f64) -> f64 {
    let before: f64 = (1..period).map(period_seconds).sum();
    before + period_seconds(period) - clock_remaining
}

/// Total game length in seconds for a game that ran `periods` periods.
pub fn game_seconds(periods: u32) -> f64 {
    (1..=periods).map(period_seconds).sum()
}
