use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{require_path, RunConfig};
use crate::court::CourtGrid;
use crate::error::{Error, Result};
use crate::ids::{LineupKey, PlayerId, TeamId};
use crate::ingest::{
    build_stints, flag_replacement_players, join_shots, parse_games, parse_pbp, parse_shots, read_games, read_shots,
    read_stints, write_games, write_shots_tagged, write_stints, FlaggedGame, GameInfo, JoinDiagnostics, JoinResult,
    LineupDataset, LineupStint,
};
use crate::io::{write_csv_with, write_json};

pub const STINTS_FILE: &str = "stints.csv";
pub const LINEUP_SHOTS_FILE: &str = "lineup_shots.csv";
pub const LINEUPS_FILE: &str = "lineups.json";
pub const SEASON_WEIGHTS_FILE: &str = "season_weights.csv";
pub const REPLACEMENT_FILE: &str = "replacement_players.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const GAMES_FILE: &str = "games.csv";

/// Joined season data: lineup datasets, the stints behind them and the game
/// table (empty when no game file was supplied).
#[derive(Clone, Debug)]
pub struct Ingested {
    pub stints: Vec<LineupStint>,
    pub join: JoinResult,
    pub games: Vec<GameInfo>,
}

impl Ingested {
    /// Season attempts per player over all assigned in-grid shots.
    pub fn season_totals(&self) -> BTreeMap<PlayerId, u64> {
        self.join
            .season_cell_attempts
            .iter()
            .map(|(p, v)| (p.clone(), v.iter().map(|&c| u64::from(c)).sum()))
            .collect()
    }

    pub fn lineup(&self, key: &LineupKey) -> Option<&LineupDataset> {
        self.join.lineup(key)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineupEntry {
    pub lineup: String,
    pub team: TeamId,
    pub players: Vec<PlayerId>,
    pub minutes: f64,
    pub shots: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IngestDiagnostics {
    pub games_in_pbp: usize,
    pub stints: usize,
    pub lineups: usize,
    pub flagged_games: Vec<FlaggedGame>,
    pub shots: JoinDiagnostics,
}

/// Reads a CSV input, treating a zero-byte file as an empty table.
fn read_table<T>(path: &Path, parse: impl Fn(&[u8], &str) -> Result<Vec<T>>) -> Result<Vec<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    parse(&bytes, &path.display().to_string())
}

/// Reads raw shots and play-by-play, rebuilds stints and joins shots to
/// lineups, then writes the derived tables into the output directory.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestDiagnostics> {
    let shots_path = require_path(cfg.shots.as_ref(), "shots file (--shots)")?;
    let pbp_path = require_path(cfg.pbp.as_ref(), "play-by-play file (--pbp)")?;
    let games_path = match cfg.games.as_ref() {
        Some(p) => Some(require_path(Some(p), "games file (--games)")?),
        None => None,
    };
    let shots = read_table(shots_path, |b, l| parse_shots(b, l))?;
    let events = read_table(pbp_path, |b, l| parse_pbp(b, l))?;
    let games = match games_path {
        Some(p) => read_table(p, |b, l| parse_games(b, l))?,
        None => Vec::new(),
    };

    let grid = CourtGrid::new();
    let built = build_stints(&events);
    let join = join_shots(&shots, &built.stints, &grid);
    let flagged: BTreeSet<_> = built.flagged.iter().map(|f| &f.game_id).collect();
    let games: Vec<GameInfo> = games.into_iter().filter(|g| !flagged.contains(&g.game_id)).collect();

    let out = cfg.out_dir();
    write_outputs(&out, &built.stints, &join, &games, &shots)?;
    let diagnostics = IngestDiagnostics {
        games_in_pbp: events.iter().map(|e| &e.game_id).collect::<BTreeSet<_>>().len(),
        stints: built.stints.len(),
        lineups: join.lineups.len(),
        flagged_games: built.flagged,
        shots: join.diagnostics.clone(),
    };
    write_json(&out.join(DIAGNOSTICS_FILE), &diagnostics)?;
    Ok(diagnostics)
}

fn write_outputs(
    out: &Path,
    stints: &[LineupStint],
    join: &JoinResult,
    games: &[GameInfo],
    all_shots: &[crate::ingest::ShotEvent],
) -> Result<()> {
    write_csv_with(&out.join(STINTS_FILE), |buf| write_stints(buf, stints))?;

    let ids: Vec<String> = join.lineups.iter().map(|l| l.key.id()).collect();
    let rows: Vec<_> = join
        .lineups
        .iter()
        .zip(&ids)
        .flat_map(|(l, id)| l.shots.iter().map(move |s| (s, id.as_str())))
        .collect();
    write_csv_with(&out.join(LINEUP_SHOTS_FILE), |buf| write_shots_tagged(buf, "lineup_id", &rows))?;

    let entries: Vec<LineupEntry> = join
        .lineups
        .iter()
        .map(|l| LineupEntry {
            lineup: l.key.id(),
            team: l.key.team.clone(),
            players: l.key.players.to_vec(),
            minutes: l.total_minutes,
            shots: l.shots.len(),
        })
        .collect();
    write_json(&out.join(LINEUPS_FILE), &entries)?;

    write_csv_with(&out.join(SEASON_WEIGHTS_FILE), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["player_id", "cell", "attempts"])?;
        for (player, cells) in &join.season_cell_attempts {
            for (cell, &n) in cells.iter().enumerate().filter(|(_, n)| **n > 0) {
                w.write_record([player.as_str(), &cell.to_string(), &n.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io(SEASON_WEIGHTS_FILE, e))?;
        Ok(())
    })?;

    let replacement: Vec<PlayerId> = flag_replacement_players(all_shots).into_iter().collect();
    write_json(&out.join(REPLACEMENT_FILE), &replacement)?;
    write_csv_with(&out.join(GAMES_FILE), |buf| write_games(buf, games))?;
    Ok(())
}

/// Loads an `ingest` output directory. Re-joining the stored lineup shots
/// reproduces the original assignment exactly.
pub fn load_ingested(dir: &Path) -> Result<Ingested> {
    let file = |name: &str| -> Result<PathBuf> {
        let p = dir.join(name);
        require_path(Some(&p), name).map(Path::to_path_buf)
    };
    let stints = read_stints(&file(STINTS_FILE)?)?;
    let shots = read_shots(&file(LINEUP_SHOTS_FILE)?)?;
    let games_path = dir.join(GAMES_FILE);
    let games = if games_path.exists() { read_games(&games_path)? } else { Vec::new() };
    let join = join_shots(&shots, &stints, &CourtGrid::new());
    Ok(Ingested { stints, join, games })
}

/// Resolves the lineup selector. An empty selector picks, for each team, the
/// lineup with the most minutes (ties go to the smaller id).
pub fn select_lineups(data: &Ingested, selectors: &[String]) -> Result<Vec<LineupKey>> {
    if selectors.is_empty() {
        let mut best: BTreeMap<&TeamId, &LineupDataset> = BTreeMap::new();
        for l in &data.join.lineups {
            let slot = best.entry(&l.key.team).or_insert(l);
            if l.total_minutes > slot.total_minutes {
                *slot = l;
            }
        }
        return Ok(best.into_values().map(|l| l.key.clone()).collect());
    }
    selectors
        .iter()
        .map(|s| {
            LineupKey::parse(s)
                .filter(|k| data.lineup(k).is_some())
                .ok_or_else(|| Error::UnknownLineup { requested: s.clone(), available: available_lineups(data) })
        })
        .collect()
}

fn available_lineups(data: &Ingested) -> String {
    let mut lineups: Vec<&LineupDataset> = data.join.lineups.iter().collect();
    lineups.sort_by(|a, b| a.key.team.cmp(&b.key.team).then(b.total_minutes.total_cmp(&a.total_minutes)));
    if lineups.is_empty() {
        return "  (none)".into();
    }
    lineups
        .iter()
        .map(|l| format!("  {} ({:.1} min)", l.key.id(), l.total_minutes))
        .collect::<Vec<_>>()
        .join("\n")
}
