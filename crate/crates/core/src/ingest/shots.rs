use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvutil::{fmt_f64, Columns};
use super::{elapsed_seconds, period_seconds};
use crate::court::{CellIndex, CourtGrid, Point};
use crate::error::{Error, Result};
use crate::ids::{GameId, PlayerId, TeamId};

pub(crate) const SHOT_COLUMNS: [&str; 10] = [
    "game_id",
    "player_id",
    "player_name",
    "team_id",
    "period",
    "clock_seconds",
    "loc_x_tenths_ft",
    "loc_y_tenths_ft",
    "shot_made",
    "shot_value",
];

/// One field-goal attempt. Locations stay in the source convention (tenths of
/// feet from the hoop center) so that files round-trip unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotEvent {
    pub game_id: GameId,
    pub player_id: PlayerId,
    pub player_name: String,
    pub team_id: TeamId,
    pub period: u32,
    pub clock_seconds: f64,
    pub loc_x_tenths: f64,
    pub loc_y_tenths: f64,
    pub made: bool,
    pub shot_value: Option<u8>,
}

impl ShotEvent {
    pub fn location(&self) -> Point {
        Point::from_source_tenths(self.loc_x_tenths, self.loc_y_tenths)
    }

    pub fn cell(&self, grid: &CourtGrid) -> Option<CellIndex> {
        grid.cell_of(self.location())
    }

    pub fn elapsed(&self) -> f64 {
        elapsed_seconds(self.period, self.clock_seconds)
    }
}

pub(crate) fn shot_from_record(
    cols: &Columns,
    record: &csv::StringRecord,
) -> Result<ShotEvent> {
    let period: u32 = cols.parse(record, "period")?;
    if period == 0 {
        return Err(cols.error(record, "period", "period must be >= 1"));
    }
    let clock_seconds: f64 = cols.parse(record, "clock_seconds")?;
    if !(0.0..=period_seconds(period)).contains(&clock_seconds) {
        return Err(cols.error(
            record,
            "clock_seconds",
            format!("clock {clock_seconds} outside period length {}", period_seconds(period)),
        ));
    }
    let loc_x_tenths: f64 = cols.parse(record, "loc_x_tenths_ft")?;
    let loc_y_tenths: f64 = cols.parse(record, "loc_y_tenths_ft")?;
    for (field, v) in [("loc_x_tenths_ft", loc_x_tenths), ("loc_y_tenths_ft", loc_y_tenths)] {
        if !v.is_finite() {
            return Err(cols.error(record, field, "location must be finite"));
        }
    }
    let made = match cols.str(record, "shot_made") {
        "0" => false,
        "1" => true,
        other => {
            return Err(cols.error(record, "shot_made", format!("expected 0 or 1, got `{other}`")))
        }
    };
    let shot_value = match cols.str(record, "shot_value") {
        "" => None,
        "2" => Some(2),
        "3" => Some(3),
        other => {
            return Err(cols.error(record, "shot_value", format!("expected 2, 3 or blank, got `{other}`")))
        }
    };
    Ok(ShotEvent {
        game_id: GameId(cols.required(record, "game_id")?),
        player_id: PlayerId(cols.required(record, "player_id")?),
        player_name: cols.str(record, "player_name").to_owned(),
        team_id: TeamId(cols.required(record, "team_id")?),
        period,
        clock_seconds,
        loc_x_tenths,
        loc_y_tenths,
        made,
        shot_value,
    })
}

pub(crate) fn shot_fields(s: &ShotEvent) -> [String; 10] {
    [
        s.game_id.0.clone(),
        s.player_id.0.clone(),
        s.player_name.clone(),
        s.team_id.0.clone(),
        s.period.to_string(),
        fmt_f64(s.clock_seconds),
        fmt_f64(s.loc_x_tenths),
        fmt_f64(s.loc_y_tenths),
        if s.made { "1" } else { "0" }.to_owned(),
        s.shot_value.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

/// Parses a shots CSV. `label` names the source in error messages.
pub fn parse_shots<R: Read>(reader: R, label: &str) -> Result<Vec<ShotEvent>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(label, &headers, &SHOT_COLUMNS[..9])?;
    let mut shots = Vec::new();
    for record in rdr.records() {
        let record = record?;
        shots.push(shot_from_record(&cols, &record)?);
    }
    Ok(shots)
}

pub fn read_shots(path: &Path) -> Result<Vec<ShotEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_shots(file, &path.display().to_string())
}

pub fn write_shots<W: Write>(writer: W, shots: &[ShotEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SHOT_COLUMNS)?;
    for s in shots {
        w.write_record(shot_fields(s))?;
    }
    w.flush().map_err(|e| Error::io("<shots>", e))?;
    Ok(())
}

/// Like [`write_shots`] with one extra trailing column per row.
pub fn write_shots_tagged<W: Write>(writer: W, column: &str, rows: &[(&ShotEvent, &str)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = SHOT_COLUMNS.to_vec();
    header.push(column);
    w.write_record(&header)?;
    for (s, tag) in rows {
        let mut row = shot_fields(s).to_vec();
        row.push((*tag).to_owned());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<shots>", e))?;
    Ok(())
}
