use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoreObservation;
use crate::court::{CourtGrid, RegionPartition};
use crate::error::{Error, Result};
use crate::ids::{GameId, PlayerId, TeamId};
use crate::ingest::{GameInfo, LineupDataset};
use crate::metrics::{lpl_cell, tie_priority, Five, LINEUP_SIZE};

/// Attempt-weighted average of a cell surface over each region. Regions where
/// the player never shot fall back to the plain cell average.
pub fn region_fgp(partition: &RegionPartition, surface: &[f64], weights: &[u32]) -> Vec<f64> {
    let n = partition.num_regions();
    let (mut num, mut den) = (vec![0.0; n], vec![0.0; n]);
    let (mut plain, mut count) = (vec![0.0; n], vec![0usize; n]);
    for (i, region) in partition.region_of_cells().iter().enumerate() {
        let r = region.0 as usize;
        let w = weights.get(i).copied().map_or(0.0, f64::from);
        num[r] += w * surface[i];
        den[r] += w;
        plain[r] += surface[i];
        count[r] += 1;
    }
    (0..n)
        .map(|r| {
            if den[r] > 0.0 {
                num[r] / den[r]
            } else if count[r] > 0 {
                plain[r] / count[r] as f64
            } else {
                0.0
            }
        })
        .collect()
}

/// Region-level points lost: the cell formula applied to region FG% and
/// region attempt counts, with 3 points for three-point regions and 2 otherwise.
pub fn glpl_regions(
    partition: &RegionPartition,
    fgp: &Five<&[f64]>,
    attempts: &Five<Vec<f64>>,
    tie: &Five<usize>,
) -> Vec<f64> {
    partition
        .region_ids()
        .map(|region| {
            let r = region.0 as usize;
            let v = if partition.is_three_point_region(region) { 3.0 } else { 2.0 };
            let f: Five<f64> = std::array::from_fn(|j| fgp[j][r]);
            let a: Five<f64> = std::array::from_fn(|j| attempts[j][r]);
            lpl_cell(v, &f, &a, tie)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineupGlpl {
    pub lineup: String,
    pub glpl: BTreeMap<String, f64>,
}

/// Team-game aggregate of region points lost across every lineup used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameLplRecord {
    pub game_id: GameId,
    pub team_id: TeamId,
    pub opponent_id: TeamId,
    pub home: bool,
    pub score: Option<f64>,
    pub tglpl: f64,
    pub glpl: BTreeMap<String, f64>,
    pub lineups: Vec<LineupGlpl>,
}

impl GameLplRecord {
    pub fn observation(&self) -> Option<ScoreObservation> {
        Some(ScoreObservation {
            game_id: self.game_id.clone(),
            team: self.team_id.clone(),
            opponent: self.opponent_id.clone(),
            home: self.home,
            score: self.score?,
            tglpl: self.tglpl,
        })
    }
}

/// Sum over lineups and regions.
pub fn tglpl(lineups: &[LineupGlpl]) -> f64 {
    lineups.iter().flat_map(|l| l.glpl.values()).sum()
}

/// Inputs shared by every game: per-player region FG% and season attempt
/// totals used for tie-breaking.
pub struct GlplContext<'a> {
    pub partition: &'a RegionPartition,
    pub grid: &'a CourtGrid,
    pub region_fgp: &'a BTreeMap<PlayerId, Vec<f64>>,
    pub season_totals: &'a BTreeMap<PlayerId, u64>,
}

/// Builds home and away records for every game in `games`, in input order.
/// Teams without lineup shots in a game get a zero record.
pub fn game_records(ctx: &GlplContext<'_>, datasets: &[LineupDataset], games: &[GameInfo]) -> Result<Vec<GameLplRecord>> {
    // (game, team) -> per-lineup region attempt vectors, in dataset order
    let mut by_game: BTreeMap<(&GameId, &TeamId), Vec<(&LineupDataset, Five<Vec<f64>>)>> = BTreeMap::new();
    let n = ctx.partition.num_regions();
    for ds in datasets {
        let mut per_game: BTreeMap<&GameId, Five<Vec<f64>>> = BTreeMap::new();
        for shot in &ds.shots {
            let Some(slot) = ds.key.players.iter().position(|p| *p == shot.player_id) else {
                continue;
            };
            let region = ctx.partition.classify_location(shot.cell(ctx.grid));
            let entry = per_game
                .entry(&shot.game_id)
                .or_insert_with(|| std::array::from_fn(|_| vec![0.0; n]));
            entry[slot][region.0 as usize] += 1.0;
        }
        for (game, attempts) in per_game {
            by_game.entry((game, &ds.key.team)).or_default().push((ds, attempts));
        }
    }

    let mut out = Vec::with_capacity(games.len() * 2);
    for game in games {
        for team in [&game.home_team, &game.away_team] {
            let (opponent, home) = game.opponent(team).expect("team is in its own game");
            let mut lineups = Vec::new();
            for (ds, attempts) in by_game.get(&(&game.game_id, team)).map(Vec::as_slice).unwrap_or(&[]) {
                let players = &ds.key.players;
                let mut rates: Vec<&[f64]> = Vec::with_capacity(LINEUP_SIZE);
                for p in players {
                    let r = ctx.region_fgp.get(p).ok_or_else(|| {
                        Error::validation(format!("no FG% estimate for player {p} in lineup {}", ds.key))
                    })?;
                    rates.push(r);
                }
                let fgp: Five<&[f64]> = std::array::from_fn(|j| rates[j]);
                let totals: Five<u64> = std::array::from_fn(|j| ctx.season_totals.get(&players[j]).copied().unwrap_or(0));
                let tie = tie_priority(players, &totals);
                let values = glpl_regions(ctx.partition, &fgp, attempts, &tie);
                let glpl = ctx
                    .partition
                    .region_ids()
                    .map(|r| (ctx.partition.region_name(r).to_owned(), values[r.0 as usize]))
                    .collect();
                lineups.push(LineupGlpl { lineup: ds.key.id(), glpl });
            }
            let mut glpl: BTreeMap<String, f64> = ctx
                .partition
                .region_ids()
                .map(|r| (ctx.partition.region_name(r).to_owned(), 0.0))
                .collect();
            for l in &lineups {
                for (k, v) in &l.glpl {
                    *glpl.get_mut(k).expect("same partition") += v;
                }
            }
            out.push(GameLplRecord {
                game_id: game.game_id.clone(),
                team_id: team.clone(),
                opponent_id: opponent.clone(),
                home,
                score: game.score_of(team),
                tglpl: tglpl(&lineups),
                glpl,
                lineups,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::court::{broad3, Point};
    use crate::ids::LineupKey;
    use crate::ingest::ShotEvent;

    const NATURAL: Five<usize> = [0, 1, 2, 3, 4];

    fn shot(game: &str, player: &str, at: Point) -> ShotEvent {
        let (x, y) = at.to_source_tenths();
        ShotEvent {
            game_id: game.into(),
            player_id: player.into(),
            player_name: String::new(),
            team_id: "CLE".into(),
            period: 1,
            clock_seconds: 600.0,
            loc_x_tenths: x,
            loc_y_tenths: y,
            made: false,
            shot_value: None,
        }
    }

    fn players() -> [PlayerId; 5] {
        ["a", "b", "c", "d", "e"].map(PlayerId::from)
    }

    #[test]
    fn toy_region_matches_cell_arithmetic() {
        let g = CourtGrid::new();
        let part = RegionPartition::broad3(&g);
        let rates = [0.40, 0.38, 0.35, 0.30, 0.25].map(|f| {
            let mut v = vec![0.5; 3];
            v[broad3::THREE_POINT.0 as usize] = f;
            v
        });
        let fgp: Five<&[f64]> = std::array::from_fn(|j| rates[j].as_slice());
        let attempts = [4.0, 3.0, 9.0, 2.0, 1.0].map(|a| {
            let mut v = vec![0.0; 3];
            v[broad3::THREE_POINT.0 as usize] = a;
            v
        });
        let out = glpl_regions(&part, &fgp, &attempts, &NATURAL);
        assert!((out[broad3::THREE_POINT.0 as usize] - 0.84).abs() < 1e-12);
        assert_eq!(out[broad3::RESTRICTED_AREA.0 as usize], 0.0);
        assert_eq!(out[broad3::MID_RANGE.0 as usize], 0.0);
    }

    #[test]
    fn region_fgp_weights_by_attempts_and_falls_back() {
        let g = CourtGrid::new();
        let part = RegionPartition::broad3(&g);
        let mut surface = vec![0.5; 2350];
        let mut weights = vec![0u32; 2350];
        let rim = g.cell_of(Point::new(25.5, 5.5)).unwrap().0;
        let rim2 = g.cell_of(Point::new(24.5, 4.5)).unwrap().0;
        surface[rim] = 0.7;
        surface[rim2] = 0.4;
        weights[rim] = 3;
        weights[rim2] = 1;
        let f = region_fgp(&part, &surface, &weights);
        assert!((f[broad3::RESTRICTED_AREA.0 as usize] - (3.0 * 0.7 + 0.4) / 4.0).abs() < 1e-12);
        assert!((f[broad3::THREE_POINT.0 as usize] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn records_sum_lineups_and_cover_both_teams() {
        let g = CourtGrid::new();
        let part = RegionPartition::broad3(&g);
        let three = Point::new(25.5, 31.5);
        let key = LineupKey::new("CLE".into(), players());
        let counts = [4, 3, 9, 2, 1];
        let mut shots = Vec::new();
        for (j, c) in counts.iter().enumerate() {
            for _ in 0..*c {
                shots.push(shot("g1", players()[j].as_str(), three));
            }
        }
        // the same unit split into two pseudo-lineups with different minutes
        let (first, second): (Vec<_>, Vec<_>) = shots.into_iter().enumerate().partition(|(i, _)| i % 2 == 0);
        let datasets = vec![
            LineupDataset { key: key.clone(), total_minutes: 10.0, shots: first.into_iter().map(|(_, s)| s).collect() },
            LineupDataset { key: key.clone(), total_minutes: 8.0, shots: second.into_iter().map(|(_, s)| s).collect() },
        ];
        let fg = [0.40, 0.38, 0.35, 0.30, 0.25];
        let region_fgp: BTreeMap<PlayerId, Vec<f64>> =
            players().iter().zip(fg).map(|(p, f)| (p.clone(), vec![0.5, 0.4, f])).collect();
        let season_totals = BTreeMap::new();
        let ctx = GlplContext { partition: &part, grid: &g, region_fgp: &region_fgp, season_totals: &season_totals };
        let games = vec![GameInfo {
            game_id: "g1".into(),
            home_team: "CLE".into(),
            away_team: "BOS".into(),
            home_score: Some(101.0),
            away_score: Some(97.0),
        }];
        let recs = game_records(&ctx, &datasets, &games).unwrap();
        assert_eq!(recs.len(), 2);
        let cle = &recs[0];
        assert_eq!(cle.lineups.len(), 2);
        assert!(cle.home);
        assert!((cle.tglpl - tglpl(&cle.lineups)).abs() < 1e-12);
        assert!((cle.tglpl - cle.glpl.values().sum::<f64>()).abs() < 1e-12);
        // brute-force each split separately
        let split_total: f64 = datasets
            .iter()
            .map(|ds| {
                let mut a = [0.0; 5];
                for s in &ds.shots {
                    a[players().iter().position(|p| *p == s.player_id).unwrap()] += 1.0;
                }
                crate::synth::oracle_lpl(3.0, &fg, &a)
            })
            .sum();
        assert!((cle.tglpl - split_total).abs() < 1e-12);
        let bos = &recs[1];
        assert_eq!(bos.tglpl, 0.0);
        assert!(bos.lineups.is_empty());
        assert_eq!(bos.observation().unwrap().score, 97.0);
    }
}
