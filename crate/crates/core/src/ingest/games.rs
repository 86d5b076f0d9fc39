use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvutil::{fmt_f64, Columns};
use crate::error::{Error, Result};
use crate::ids::{GameId, TeamId};

pub(crate) const GAME_COLUMNS: [&str; 5] = ["game_id", "home_team_id", "away_team_id", "home_score", "away_score"];

/// One row of the games table: who played where, and the final score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameInfo {
    pub game_id: GameId,
    pub home_team: TeamId,
    pub away_team: TeamId,
    pub home_score: Option<f64>,
    pub away_score: Option<f64>,
}

impl GameInfo {
    pub fn opponent(&self, team: &TeamId) -> Option<(&TeamId, bool)> {
        if *team == self.home_team {
            Some((&self.away_team, true))
        } else if *team == self.away_team {
            Some((&self.home_team, false))
        } else {
            None
        }
    }

    pub fn score_of(&self, team: &TeamId) -> Option<f64> {
        if *team == self.home_team {
            self.home_score
        } else if *team == self.away_team {
            self.away_score
        } else {
            None
        }
    }
}

pub fn parse_games<R: Read>(reader: R, label: &str) -> Result<Vec<GameInfo>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(label, &headers, &GAME_COLUMNS[..3])?;
    let mut games = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let score = |field: &str| -> Result<Option<f64>> {
            if cols.str(&record, field).is_empty() {
                return Ok(None);
            }
            let v: f64 = cols.parse(&record, field)?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(cols.error(&record, field, format!("score must be non-negative, got {v}")));
            }
            Ok(Some(v))
        };
        let game = GameInfo {
            game_id: cols.required(&record, "game_id")?.into(),
            home_team: cols.required(&record, "home_team_id")?.into(),
            away_team: cols.required(&record, "away_team_id")?.into(),
            home_score: score("home_score")?,
            away_score: score("away_score")?,
        };
        if game.home_team == game.away_team {
            return Err(cols.error(&record, "away_team_id", "home and away team are the same"));
        }
        games.push(game);
    }
    Ok(games)
}

pub fn read_games(path: &Path) -> Result<Vec<GameInfo>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_games(file, &path.display().to_string())
}

pub fn write_games<W: Write>(writer: W, games: &[GameInfo]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GAME_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for g in games {
        w.write_record([
            g.game_id.as_str(),
            g.home_team.as_str(),
            g.away_team.as_str(),
            &opt(g.home_score),
            &opt(g.away_score),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<games>", e))?;
    Ok(())
}
