use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::pbp::LineupStint;
use super::shots::ShotEvent;
use crate::court::CourtGrid;
use crate::ids::{GameId, LineupKey, PlayerId, TeamId};

/// Players with fewer season attempts than this are replacement players.
pub const REPLACEMENT_THRESHOLD: usize = 5;

/// Everything observed for one five-player unit over the season.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineupDataset {
    pub key: LineupKey,
    pub total_minutes: f64,
    pub shots: Vec<ShotEvent>,
}

impl LineupDataset {
    pub fn player_shots<'a>(&'a self, player: &'a PlayerId) -> impl Iterator<Item = &'a ShotEvent> + 'a {
        self.shots.iter().filter(move |s| &s.player_id == player)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinDiagnostics {
    pub input_shots: usize,
    pub assigned_shots: usize,
    /// Shots whose timestamp falls in no stint of the shooter's team.
    pub unmatched_shots: usize,
    /// Shots matched to a stint that does not include the shooter.
    pub shooter_not_on_court: usize,
    /// Assigned shots located outside the half-court grid.
    pub off_grid_shots: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct JoinResult {
    pub lineups: Vec<LineupDataset>,
    /// Per-player attempts in each grid cell over all assigned shots.
    pub season_cell_attempts: BTreeMap<PlayerId, Vec<u32>>,
    pub diagnostics: JoinDiagnostics,
}

impl JoinResult {
    pub fn lineup(&self, key: &LineupKey) -> Option<&LineupDataset> {
        self.lineups.iter().find(|l| &l.key == key)
    }

    pub fn season_total(&self, player: &PlayerId) -> u64 {
        self.season_cell_attempts
            .get(player)
            .map_or(0, |v| v.iter().map(|&c| u64::from(c)).sum())
    }
}

/// Assigns each shot to the stint containing its timestamp. A shot at the
/// exact instant of a lineup change belongs to the incoming unit; the last
/// stint of a game also owns the final buzzer.
pub fn join_shots(shots: &[ShotEvent], stints: &[LineupStint], grid: &CourtGrid) -> JoinResult {
    let mut index: BTreeMap<(&GameId, &TeamId), Vec<&LineupStint>> = BTreeMap::new();
    for s in stints {
        index.entry((&s.game_id, &s.lineup.team)).or_default().push(s);
    }
    for v in index.values_mut() {
        v.sort_by(|a, b| a.start_elapsed().total_cmp(&b.start_elapsed()));
    }

    let mut datasets: BTreeMap<LineupKey, LineupDataset> = BTreeMap::new();
    for s in stints {
        datasets
            .entry(s.lineup.clone())
            .or_insert_with(|| LineupDataset {
                key: s.lineup.clone(),
                total_minutes: 0.0,
                shots: Vec::new(),
            })
            .total_minutes += s.minutes;
    }

    let mut diag = JoinDiagnostics {
        input_shots: shots.len(),
        ..Default::default()
    };
    let mut season: BTreeMap<PlayerId, Vec<u32>> = BTreeMap::new();
    for shot in shots {
        let t = shot.elapsed();
        let stint = index.get(&(&shot.game_id, &shot.team_id)).and_then(|list| {
            list.iter().enumerate().find_map(|(i, s)| {
                let last = i + 1 == list.len();
                let inside = s.start_elapsed() <= t && (t < s.end_elapsed() || (last && t == s.end_elapsed()));
                inside.then_some(*s)
            })
        });
        let Some(stint) = stint else {
            diag.unmatched_shots += 1;
            continue;
        };
        if !stint.lineup.contains(&shot.player_id) {
            diag.shooter_not_on_court += 1;
            continue;
        }
        diag.assigned_shots += 1;
        match shot.cell(grid) {
            Some(cell) => {
                season
                    .entry(shot.player_id.clone())
                    .or_insert_with(|| vec![0; grid.num_cells()])[cell.0] += 1;
            }
            None => diag.off_grid_shots += 1,
        }
        datasets
            .get_mut(&stint.lineup)
            .expect("dataset exists for every stint")
            .shots
            .push(shot.clone());
    }

    JoinResult {
        lineups: datasets.into_values().collect(),
        season_cell_attempts: season,
        diagnostics: diag,
    }
}

pub fn flag_replacement_players(shots: &[ShotEvent]) -> BTreeSet<PlayerId> {
    let mut counts: BTreeMap<&PlayerId, usize> = BTreeMap::new();
    for s in shots {
        *counts.entry(&s.player_id).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n < REPLACEMENT_THRESHOLD)
        .map(|(p, _)| p.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stint(game: &str, team: &str, players: [&str; 5], start: (u32, f64), end: (u32, f64)) -> LineupStint {
        let s = super::super::elapsed_seconds(start.0, start.1);
        let e = super::super::elapsed_seconds(end.0, end.1);
        LineupStint {
            game_id: game.into(),
            lineup: LineupKey::new(team.into(), players.map(PlayerId::from)),
            start_period: start.0,
            start_clock: start.1,
            end_period: end.0,
            end_clock: end.1,
            minutes: (e - s) / 60.0,
        }
    }

    fn shot(player: &str, period: u32, clock: f64) -> ShotEvent {
        ShotEvent {
            game_id: "g".into(),
            player_id: player.into(),
            player_name: String::new(),
            team_id: "A".into(),
            period,
            clock_seconds: clock,
            loc_x_tenths: 5.0,
            loc_y_tenths: 5.0,
            made: false,
            shot_value: None,
        }
    }

    const FIRST: [&str; 5] = ["1", "2", "3", "4", "5"];
    const SECOND: [&str; 5] = ["1", "2", "3", "4", "6"];

    #[test]
    fn three_shots_in_one_stint() {
        let stints = [stint("g", "A", FIRST, (1, 720.0), (4, 0.0))];
        let shots = [shot("1", 1, 700.0), shot("2", 2, 10.0), shot("5", 4, 0.0)];
        let res = join_shots(&shots, &stints, &CourtGrid::new());
        assert_eq!(res.lineups.len(), 1);
        assert_eq!(res.lineups[0].shots.len(), 3);
        assert_eq!(res.lineups[0].total_minutes, 48.0);
        assert_eq!(res.diagnostics.assigned_shots, 3);
    }

    #[test]
    fn boundary_shot_goes_to_incoming_lineup() {
        let stints = [
            stint("g", "A", FIRST, (1, 720.0), (2, 360.0)),
            stint("g", "A", SECOND, (2, 360.0), (4, 0.0)),
        ];
        let shots = [shot("1", 2, 360.0)];
        let res = join_shots(&shots, &stints, &CourtGrid::new());
        let second = res.lineups.iter().find(|l| l.key.contains(&"6".into())).unwrap();
        assert_eq!(second.shots.len(), 1);
    }

    #[test]
    fn unmatched_and_off_court_shots_are_counted() {
        let stints = [stint("g", "A", FIRST, (1, 720.0), (4, 0.0))];
        let mut other_game = shot("1", 1, 10.0);
        other_game.game_id = "h".into();
        let shots = [other_game, shot("9", 1, 10.0), shot("1", 1, 10.0)];
        let res = join_shots(&shots, &stints, &CourtGrid::new());
        let d = &res.diagnostics;
        assert_eq!((d.unmatched_shots, d.shooter_not_on_court, d.assigned_shots), (1, 1, 1));
        assert_eq!(d.assigned_shots + d.unmatched_shots + d.shooter_not_on_court, d.input_shots);
    }

    #[test]
    fn off_grid_shots_are_assigned_but_not_binned() {
        let stints = [stint("g", "A", FIRST, (1, 720.0), (4, 0.0))];
        let mut heave = shot("1", 1, 1.0);
        heave.loc_y_tenths = 600.0;
        let res = join_shots(&[heave], &stints, &CourtGrid::new());
        assert_eq!(res.diagnostics.off_grid_shots, 1);
        assert_eq!(res.lineups[0].shots.len(), 1);
        assert_eq!(res.season_total(&"1".into()), 0);
    }

    #[test]
    fn replacement_threshold_is_five_shots() {
        let mut shots: Vec<ShotEvent> = (0..4).map(|_| shot("few", 1, 1.0)).collect();
        shots.extend((0..5).map(|_| shot("enough", 1, 1.0)));
        let flagged = flag_replacement_players(&shots);
        assert!(flagged.contains(&"few".into()));
        assert!(!flagged.contains(&"enough".into()));
        assert!(flag_replacement_players(&[]).is_empty());
    }
}
