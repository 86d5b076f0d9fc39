use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvutil::{fmt_f64, Columns};
use super::{elapsed_seconds, period_seconds};
use crate::error::{Error, Result};
use crate::ids::{GameId, LineupKey, PlayerId, TeamId};

const PBP_COLUMNS: [&str; 9] = [
    "game_id",
    "event_num",
    "period",
    "clock_seconds",
    "event_type",
    "player1_id",
    "player2_id",
    "team_id",
    "description",
];

const STINT_COLUMNS: [&str; 12] = [
    "game_id",
    "team_id",
    "p1",
    "p2",
    "p3",
    "p4",
    "p5",
    "start_period",
    "start_clock",
    "end_period",
    "end_clock",
    "minutes",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// `player1` leaves, `player2` enters.
    Substitution,
    /// `player1` is on court when the period starts.
    Starter,
    Other(String),
}

impl EventKind {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "substitution" | "sub" | "8" => EventKind::Substitution,
            "starter" => EventKind::Starter,
            other => EventKind::Other(other.to_owned()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            EventKind::Substitution => "substitution",
            EventKind::Starter => "starter",
            EventKind::Other(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PbpEvent {
    pub game_id: GameId,
    pub event_num: u64,
    pub period: u32,
    pub clock_seconds: f64,
    pub kind: EventKind,
    pub player1: Option<PlayerId>,
    pub player2: Option<PlayerId>,
    pub team: Option<TeamId>,
    pub description: String,
}

/// A maximal interval during which one five-player unit is on court.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineupStint {
    pub game_id: GameId,
    pub lineup: LineupKey,
    pub start_period: u32,
    pub start_clock: f64,
    pub end_period: u32,
    pub end_clock: f64,
    pub minutes: f64,
}

impl LineupStint {
    pub fn start_elapsed(&self) -> f64 {
        elapsed_seconds(self.start_period, self.start_clock)
    }

    pub fn end_elapsed(&self) -> f64 {
        elapsed_seconds(self.end_period, self.end_clock)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedGame {
    pub game_id: GameId,
    pub team_id: Option<TeamId>,
    pub period: u32,
    pub reason: String,
    pub candidates: Vec<PlayerId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StintBuild {
    pub stints: Vec<LineupStint>,
    pub flagged: Vec<FlaggedGame>,
}

pub fn parse_pbp<R: Read>(reader: R, label: &str) -> Result<Vec<PbpEvent>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(label, &headers, &PBP_COLUMNS[..8])?;
    let mut events = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let period: u32 = cols.parse(&record, "period")?;
        if period == 0 {
            return Err(cols.error(&record, "period", "period must be >= 1"));
        }
        let clock_seconds: f64 = cols.parse(&record, "clock_seconds")?;
        if !(0.0..=period_seconds(period)).contains(&clock_seconds) {
            return Err(cols.error(&record, "clock_seconds", "clock outside period length"));
        }
        let kind = EventKind::parse(cols.str(&record, "event_type"));
        let player1 = cols.optional(&record, "player1_id").map(PlayerId);
        let player2 = cols.optional(&record, "player2_id").map(PlayerId);
        let team = cols.optional(&record, "team_id").map(TeamId);
        if kind == EventKind::Substitution && (player1.is_none() || player2.is_none() || team.is_none()) {
            return Err(cols.error(
                &record,
                "player2_id",
                "substitution rows need player1_id (out), player2_id (in) and team_id",
            ));
        }
        events.push(PbpEvent {
            game_id: GameId(cols.required(&record, "game_id")?),
            event_num: cols.parse(&record, "event_num")?,
            period,
            clock_seconds,
            kind,
            player1,
            player2,
            team,
            description: cols.str(&record, "description").to_owned(),
        });
    }
    Ok(events)
}

pub fn read_pbp(path: &Path) -> Result<Vec<PbpEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pbp(file, &path.display().to_string())
}

pub fn write_pbp<W: Write>(writer: W, events: &[PbpEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PBP_COLUMNS)?;
    for e in events {
        let opt = |p: &Option<PlayerId>| p.as_ref().map(|p| p.0.clone()).unwrap_or_default();
        w.write_record([
            e.game_id.0.clone(),
            e.event_num.to_string(),
            e.period.to_string(),
            fmt_f64(e.clock_seconds),
            e.kind.as_str().to_owned(),
            opt(&e.player1),
            opt(&e.player2),
            e.team.as_ref().map(|t| t.0.clone()).unwrap_or_default(),
            e.description.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<pbp>", e))?;
    Ok(())
}

pub fn write_stints<W: Write>(writer: W, stints: &[LineupStint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STINT_COLUMNS)?;
    for s in stints {
        let mut row = vec![s.game_id.0.clone(), s.lineup.team.0.clone()];
        row.extend(s.lineup.players.iter().map(|p| p.0.clone()));
        row.extend([
            s.start_period.to_string(),
            fmt_f64(s.start_clock),
            s.end_period.to_string(),
            fmt_f64(s.end_clock),
            fmt_f64(s.minutes),
        ]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<stints>", e))?;
    Ok(())
}

pub fn read_stints(path: &Path) -> Result<Vec<LineupStint>> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(&label, &headers, &STINT_COLUMNS)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let players = ["p1", "p2", "p3", "p4", "p5"]
            .map(|f| PlayerId(cols.str(&record, f).to_owned()));
        out.push(LineupStint {
            game_id: GameId(cols.required(&record, "game_id")?),
            lineup: LineupKey::new(TeamId(cols.required(&record, "team_id")?), players),
            start_period: cols.parse(&record, "start_period")?,
            start_clock: cols.parse(&record, "start_clock")?,
            end_period: cols.parse(&record, "end_period")?,
            end_clock: cols.parse(&record, "end_clock")?,
            minutes: cols.parse(&record, "minutes")?,
        });
    }
    Ok(out)
}

/// Replays play-by-play into lineup stints. Games whose on-court units cannot
/// be resolved are excluded and reported in [`StintBuild::flagged`].
pub fn build_stints(events: &[PbpEvent]) -> StintBuild {
    let mut by_game: BTreeMap<&GameId, Vec<&PbpEvent>> = BTreeMap::new();
    for e in events {
        by_game.entry(&e.game_id).or_default().push(e);
    }
    let mut build = StintBuild::default();
    for (game, mut game_events) in by_game {
        // stable: ties keep file order
        game_events.sort_by(|a, b| {
            a.period
                .cmp(&b.period)
                .then(b.clock_seconds.total_cmp(&a.clock_seconds))
        });
        match game_stints(game, &game_events) {
            Ok(stints) => build.stints.extend(stints),
            Err(flag) => build.flagged.push(flag),
        }
    }
    build
}

fn team_map(events: &[&PbpEvent]) -> HashMap<PlayerId, TeamId> {
    let mut map = HashMap::new();
    for e in events {
        let Some(team) = &e.team else { continue };
        if let Some(p) = &e.player1 {
            map.entry(p.clone()).or_insert_with(|| team.clone());
        }
        if e.kind == EventKind::Substitution {
            if let Some(p) = &e.player2 {
                map.entry(p.clone()).or_insert_with(|| team.clone());
            }
        }
    }
    map
}

struct Open {
    players: BTreeSet<PlayerId>,
    period: u32,
    clock: f64,
}

fn game_stints(game: &GameId, events: &[&PbpEvent]) -> std::result::Result<Vec<LineupStint>, FlaggedGame> {
    let teams_of = team_map(events);
    let teams: BTreeSet<&TeamId> = events.iter().filter_map(|e| e.team.as_ref()).collect();
    let max_period = events.iter().map(|e| e.period).max().unwrap_or(4).max(4);

    let flag = |team: &TeamId, period: u32, reason: String, candidates: Vec<PlayerId>| FlaggedGame {
        game_id: game.clone(),
        team_id: Some(team.clone()),
        period,
        reason,
        candidates,
    };

    let mut stints = Vec::new();
    for team in teams {
        let mut open: Option<Open> = None;
        let mut prev_end: Option<BTreeSet<PlayerId>> = None;
        let close = |open: Open, end_period: u32, end_clock: f64, out: &mut Vec<LineupStint>| {
            let players: Vec<PlayerId> = open.players.into_iter().collect();
            let players: [PlayerId; 5] = players.try_into().expect("five players on court");
            let minutes = (elapsed_seconds(end_period, end_clock) - elapsed_seconds(open.period, open.clock)) / 60.0;
            out.push(LineupStint {
                game_id: game.clone(),
                lineup: LineupKey::new(team.clone(), players),
                start_period: open.period,
                start_clock: open.clock,
                end_period,
                end_clock,
                minutes,
            });
        };
        for period in 1..=max_period {
            let period_events: Vec<&PbpEvent> =
                events.iter().copied().filter(|e| e.period == period).collect();
            let starters = resolve_starters(team, &period_events, &teams_of, prev_end.as_ref())
                .map_err(|(reason, cands)| flag(team, period, reason, cands))?;
            let len = period_seconds(period);
            open = match open {
                Some(cur) if cur.players == starters => Some(cur),
                Some(cur) => {
                    close(cur, period - 1, 0.0, &mut stints);
                    Some(Open { players: starters, period, clock: len })
                }
                None => Some(Open { players: starters, period, clock: len }),
            };
            for e in &period_events {
                if e.kind != EventKind::Substitution || e.team.as_ref() != Some(team) {
                    continue;
                }
                let (out_p, in_p) = (e.player1.clone().unwrap(), e.player2.clone().unwrap());
                let cur = open.as_mut().unwrap();
                if !cur.players.contains(&out_p) {
                    return Err(flag(
                        team,
                        period,
                        format!("event {}: outgoing player {out_p} is not on court", e.event_num),
                        cur.players.iter().cloned().collect(),
                    ));
                }
                if cur.players.contains(&in_p) {
                    return Err(flag(
                        team,
                        period,
                        format!("event {}: incoming player {in_p} is already on court", e.event_num),
                        cur.players.iter().cloned().collect(),
                    ));
                }
                let mut next = cur.players.clone();
                next.remove(&out_p);
                next.insert(in_p);
                if cur.period == period && cur.clock == e.clock_seconds {
                    cur.players = next;
                } else {
                    let prev = open.take().unwrap();
                    close(prev, period, e.clock_seconds, &mut stints);
                    open = Some(Open { players: next, period, clock: e.clock_seconds });
                }
            }
            prev_end = open.as_ref().map(|o| o.players.clone());
        }
        if let Some(cur) = open {
            close(cur, max_period, 0.0, &mut stints);
        }
    }
    Ok(stints)
}

/// Players on court at the start of a period: anyone who appears in an event
/// before being substituted in. Short lists are completed from the previous
/// period's closing unit.
fn resolve_starters(
    team: &TeamId,
    events: &[&PbpEvent],
    teams_of: &HashMap<PlayerId, TeamId>,
    prev_end: Option<&BTreeSet<PlayerId>>,
) -> std::result::Result<BTreeSet<PlayerId>, (String, Vec<PlayerId>)> {
    let mut starters: Vec<PlayerId> = Vec::new();
    let mut subbed_in: BTreeSet<PlayerId> = BTreeSet::new();
    let note = |p: &PlayerId, subbed_in: &BTreeSet<PlayerId>, starters: &mut Vec<PlayerId>| {
        if !subbed_in.contains(p) && !starters.contains(p) {
            starters.push(p.clone());
        }
    };
    for e in events {
        match e.kind {
            EventKind::Substitution => {
                if e.team.as_ref() != Some(team) {
                    continue;
                }
                let (out_p, in_p) = (e.player1.as_ref().unwrap(), e.player2.as_ref().unwrap());
                note(out_p, &subbed_in, &mut starters);
                if !starters.contains(in_p) {
                    subbed_in.insert(in_p.clone());
                }
            }
            _ => {
                for p in [&e.player1, &e.player2].into_iter().flatten() {
                    if teams_of.get(p) == Some(team) {
                        note(p, &subbed_in, &mut starters);
                    }
                }
            }
        }
    }
    let mut set: BTreeSet<PlayerId> = starters.iter().cloned().collect();
    if set.len() > 5 {
        return Err((format!("{} players appear before any substitution", set.len()), starters));
    }
    if set.len() < 5 {
        let Some(prev) = prev_end else {
            return Err((
                format!("only {} period-start players resolved and no prior period", set.len()),
                starters,
            ));
        };
        set.extend(prev.iter().filter(|p| !subbed_in.contains(*p)).cloned());
        if set.len() != 5 {
            let mut cands: Vec<PlayerId> = set.into_iter().collect();
            cands.extend(subbed_in.iter().filter(|p| prev.contains(*p)).cloned());
            return Err((
                "cannot resolve period-start lineup from prior period".into(),
                cands,
            ));
        }
    }
    Ok(set)
}
