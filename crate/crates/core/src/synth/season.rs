use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::config::{GameModel, LineupSpec, SynthConfig, TeamSpec, GAME_MINUTES};
use crate::court::{broad3, CellIndex, CourtGrid, Point, RegionPartition};
use crate::error::Result;
use crate::ids::{GameId, LineupKey, PlayerId, TeamId};
use crate::inference::{game_records, region_fgp, GameLplRecord, GlplContext};
use crate::ingest::{
    period_seconds, write_games, write_pbp, write_shots, EventKind, GameInfo, LineupDataset, PbpEvent,
    ShotEvent,
};
use crate::io::{write_csv_with, GridFile};
use crate::metrics::{rank_vector, Five, LINEUP_SIZE};
use crate::rng::task_rng;

/// A generated season with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSeason {
    pub shots: Vec<ShotEvent>,
    pub pbp: Vec<PbpEvent>,
    pub games: Vec<GameInfo>,
    /// True FG% surface of every player.
    pub truth: BTreeMap<PlayerId, Vec<f64>>,
    /// Lineup datasets exactly as constructed, before any file round trip.
    pub lineups: Vec<LineupDataset>,
    /// Game-level points lost under the true surfaces, when scores were simulated.
    pub true_records: Vec<GameLplRecord>,
}

impl SynthSeason {
    /// Writes the ingest-compatible inputs plus the truth surfaces.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_csv_with(&dir.join("shots.csv"), |buf| write_shots(buf, &self.shots))?;
        write_csv_with(&dir.join("pbp.csv"), |buf| write_pbp(buf, &self.pbp))?;
        write_csv_with(&dir.join("games.csv"), |buf| write_games(buf, &self.games))?;
        for (player, values) in &self.truth {
            let file = GridFile::single("fgp_mean", Some(player.0.clone()), None, values.clone());
            file.write(&dir.join("truth").join(format!("fgp_mean_{player}.json")))?;
        }
        if !self.true_records.is_empty() {
            write_csv_with(&dir.join("truth").join("tglpl.csv"), |buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["game_id", "team_id", "tglpl"])?;
                for r in &self.true_records {
                    w.write_record([r.game_id.as_str(), r.team_id.as_str(), &format!("{}", r.tglpl)])?;
                }
                w.flush().map_err(|e| crate::Error::io("<tglpl>", e))?;
                Ok(())
            })?;
        }
        Ok(())
    }
}

/// Largest-remainder split of `n` items by `weights`; ties go to the lower
/// index. Counts are non-increasing whenever the weights are.
pub(crate) fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

struct Zones {
    cells: [Vec<CellIndex>; 3],
    weights: [f64; 3],
}

impl Zones {
    fn new(cfg: &SynthConfig, grid: &CourtGrid) -> Zones {
        let part = RegionPartition::broad3(grid);
        let pick = |region: crate::court::RegionId, max_d: f64| -> Vec<CellIndex> {
            part.cells_in(region)
                .filter(|c| grid.centroid(*c).hoop_distance() <= max_d)
                .collect()
        };
        let m = &cfg.mixture;
        Zones {
            cells: [
                pick(broad3::RESTRICTED_AREA, f64::INFINITY),
                pick(broad3::MID_RANGE, f64::INFINITY),
                pick(broad3::THREE_POINT, m.max_three_distance),
            ],
            weights: [m.rim, m.mid, m.three],
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> CellIndex {
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut zone = 2;
        for (z, w) in self.weights.iter().enumerate() {
            if u < *w {
                zone = z;
                break;
            }
            u -= w;
        }
        let cells = &self.cells[zone];
        cells[rng.random_range(0..cells.len())]
    }
}

/// `(home, away)` team indices for every game: `rounds` full round-robins
/// with home court alternating between rounds.
fn schedule(teams: usize, rounds: usize) -> Vec<(usize, usize)> {
    let mut games = Vec::new();
    for r in 0..rounds {
        for a in 0..teams {
            for b in a + 1..teams {
                games.push(if (r + a + b) % 2 == 0 { (a, b) } else { (b, a) });
            }
        }
    }
    games
}

/// Period and remaining clock for an elapsed game time.
fn clock_at(elapsed: f64) -> (u32, f64) {
    let mut before = 0.0;
    let mut period = 1;
    loop {
        let len = period_seconds(period);
        if elapsed < before + len || period >= 4 && elapsed <= before + len {
            return (period, before + len - elapsed);
        }
        before += len;
        period += 1;
    }
}

/// One attempt before it is placed in time.
struct PlannedShot {
    slot: usize,
    cell: CellIndex,
    made: bool,
    jitter: (f64, f64),
}

fn plan_lineup(
    cfg: &SynthConfig,
    grid: &CourtGrid,
    zones: &Zones,
    truth: &BTreeMap<PlayerId, Vec<f64>>,
    key: &LineupKey,
    spec: &LineupSpec,
) -> Vec<PlannedShot> {
    let mut rng = task_rng(cfg.seed, &format!("synth/lineup/{key}"));
    let mut per_cell = vec![0usize; grid.num_cells()];
    for _ in 0..spec.shots {
        per_cell[zones.draw(&mut rng).0] += 1;
    }
    let fg: Five<&[f64]> = std::array::from_fn(|j| truth[&key.players[j]].as_slice());
    let natural: Five<usize> = [0, 1, 2, 3, 4];
    let weights = spec.policy.rank_weights();
    let mut planned = Vec::with_capacity(spec.shots);
    for (i, &n) in per_cell.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let xi: Five<f64> = std::array::from_fn(|j| fg[j][i]);
        let shooters: Vec<usize> = match weights {
            Some(w) => {
                let by_rank = apportion(n, &w);
                let ranks = rank_vector(&xi, &natural);
                (0..LINEUP_SIZE)
                    .flat_map(|j| std::iter::repeat_n(j, by_rank[ranks[j] as usize - 1]))
                    .collect()
            }
            None => (0..n).map(|_| rng.random_range(0..LINEUP_SIZE)).collect(),
        };
        for slot in shooters {
            planned.push(PlannedShot {
                slot,
                cell: CellIndex(i),
                made: rng.random::<f64>() < xi[slot],
                jitter: (rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)),
            });
        }
    }
    planned.shuffle(&mut rng);
    planned
}

struct TeamGame<'a> {
    game: GameId,
    team: &'a TeamSpec,
    keys: Vec<LineupKey>,
}

/// Emits starter, substitution and shot events plus shot rows for one team in
/// one game. Lineups play consecutive chunks in config order.
fn play_team_game(
    tg: &TeamGame<'_>,
    plans: &[Vec<PlannedShot>],
    game_index: usize,
    games_per_team: usize,
    grid: &CourtGrid,
    events: &mut Vec<PbpEvent>,
    shots: &mut Vec<ShotEvent>,
    by_lineup: &mut [Vec<ShotEvent>],
) {
    let total = GAME_MINUTES * 60.0;
    let team_id = TeamId::from(tg.team.id.as_str());
    let mut start = 0.0;
    let mut chunks = Vec::with_capacity(tg.team.lineups.len());
    for (l, spec) in tg.team.lineups.iter().enumerate() {
        let last = l + 1 == tg.team.lineups.len();
        let end = if last { total } else { start + spec.minutes * 60.0 / games_per_team as f64 };
        chunks.push((start, end));
        start = end;
    }

    let event = |period, clock, kind, p1: &PlayerId, p2: Option<&PlayerId>| PbpEvent {
        game_id: tg.game.clone(),
        event_num: 0,
        period,
        clock_seconds: clock,
        kind,
        player1: Some(p1.clone()),
        player2: p2.cloned(),
        team: Some(team_id.clone()),
        description: String::new(),
    };
    let on_court_at = |t: f64| -> usize { chunks.iter().position(|(s, e)| t >= *s && t < *e).unwrap_or(chunks.len() - 1) };

    for period in 1..=4u32 {
        let period_start = f64::from(period - 1) * period_seconds(1);
        let unit = &tg.keys[on_court_at(period_start)];
        for p in &unit.players {
            events.push(event(period, period_seconds(period), EventKind::Starter, p, None));
        }
    }
    for l in 1..chunks.len() {
        let t = chunks[l].0;
        let (period, clock) = clock_at(t);
        if clock == period_seconds(period) {
            // change at a period break: the starter rows already say it
            continue;
        }
        let (prev, next) = (&tg.keys[l - 1].players, &tg.keys[l].players);
        let outgoing: Vec<&PlayerId> = prev.iter().filter(|p| !next.contains(p)).collect();
        let incoming: Vec<&PlayerId> = next.iter().filter(|p| !prev.contains(p)).collect();
        for (o, i) in outgoing.into_iter().zip(incoming) {
            events.push(event(period, clock, EventKind::Substitution, o, Some(i)));
        }
    }

    for (l, plan) in plans.iter().enumerate() {
        let key = &tg.keys[l];
        let per_game = apportion(plan.len(), &vec![1.0; games_per_team]);
        let offset: usize = per_game[..game_index].iter().sum();
        let n = per_game[game_index];
        let (s, e) = chunks[l];
        for (k, shot) in plan[offset..offset + n].iter().enumerate() {
            let t = s + (k as f64 + 0.5) * (e - s) / n as f64;
            let (period, clock) = clock_at(t);
            let player = &key.players[shot.slot];
            let c = grid.centroid(shot.cell);
            let (x, y) = Point::new(c.x + shot.jitter.0, c.y + shot.jitter.1).to_source_tenths();
            let value = grid.point_value(shot.cell).expect("cell is on the grid").points() as u8;
            let kind = if shot.made { "made_shot" } else { "missed_shot" };
            events.push(event(period, clock, EventKind::Other(kind.into()), player, None));
            let row = ShotEvent {
                game_id: tg.game.clone(),
                player_id: player.clone(),
                player_name: format!("Player {player}"),
                team_id: team_id.clone(),
                period,
                clock_seconds: clock,
                loc_x_tenths: x,
                loc_y_tenths: y,
                made: shot.made,
                shot_value: Some(value),
            };
            by_lineup[l].push(row.clone());
            shots.push(row);
        }
    }
}

fn team_effects(cfg: &SynthConfig, model: &GameModel) -> Vec<(f64, f64)> {
    let mut rng = task_rng(cfg.seed, "synth/team-effects");
    let normal = Normal::new(0.0, model.team_sd).expect("validated sd");
    let mut off: Vec<f64> = cfg.teams.iter().map(|t| t.offense.unwrap_or_else(|| normal.sample(&mut rng))).collect();
    let mut def: Vec<f64> = cfg.teams.iter().map(|t| t.defense.unwrap_or_else(|| normal.sample(&mut rng))).collect();
    for v in [&mut off, &mut def] {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    }
    off.into_iter().zip(def).collect()
}

/// Generates a full season. A pure function of the config.
pub fn generate_season(cfg: &SynthConfig) -> Result<SynthSeason> {
    cfg.validate()?;
    let grid = CourtGrid::new();
    let zones = Zones::new(cfg, &grid);
    let truth: BTreeMap<PlayerId, Vec<f64>> =
        cfg.all_players().into_iter().map(|p| (PlayerId::from(p), cfg.true_fgp(p, &grid))).collect();

    let keys: Vec<Vec<LineupKey>> = cfg
        .teams
        .iter()
        .map(|t| t.lineups.iter().map(|l| cfg.lineup_key(t, l)).collect())
        .collect();
    let jobs: Vec<(usize, usize)> = cfg
        .teams
        .iter()
        .enumerate()
        .flat_map(|(t, team)| (0..team.lineups.len()).map(move |l| (t, l)))
        .collect();
    let planned: Vec<Vec<PlannedShot>> = jobs
        .par_iter()
        .map(|&(t, l)| plan_lineup(cfg, &grid, &zones, &truth, &keys[t][l], &cfg.teams[t].lineups[l]))
        .collect();
    let mut plans: Vec<Vec<Vec<PlannedShot>>> = cfg.teams.iter().map(|_| Vec::new()).collect();
    for ((t, _), plan) in jobs.iter().zip(planned) {
        plans[*t].push(plan);
    }

    let width = cfg.games_per_team().max(1).to_string().len().max(3);
    let sched = schedule(cfg.teams.len(), cfg.rounds);
    let mut played = vec![0usize; cfg.teams.len()];
    let mut events = Vec::new();
    let mut shots = Vec::new();
    let mut games = Vec::with_capacity(sched.len());
    let mut by_lineup: Vec<Vec<Vec<ShotEvent>>> = cfg.teams.iter().map(|t| vec![Vec::new(); t.lineups.len()]).collect();
    for (g, &(home, away)) in sched.iter().enumerate() {
        let game = GameId::from(format!("G{:0width$}", g + 1).as_str());
        let mut game_events = Vec::new();
        for t in [home, away] {
            let tg = TeamGame { game: game.clone(), team: &cfg.teams[t], keys: keys[t].clone() };
            play_team_game(
                &tg,
                &plans[t],
                played[t],
                cfg.games_per_team(),
                &grid,
                &mut game_events,
                &mut shots,
                &mut by_lineup[t],
            );
            played[t] += 1;
        }
        game_events.sort_by(|a, b| a.period.cmp(&b.period).then(b.clock_seconds.total_cmp(&a.clock_seconds)));
        for (k, e) in game_events.iter_mut().enumerate() {
            e.event_num = k as u64 + 1;
        }
        events.extend(game_events);
        games.push(GameInfo {
            game_id: game,
            home_team: TeamId::from(cfg.teams[home].id.as_str()),
            away_team: TeamId::from(cfg.teams[away].id.as_str()),
            home_score: None,
            away_score: None,
        });
    }

    let mut lineups: Vec<LineupDataset> = Vec::new();
    for ((t, team), team_shots) in cfg.teams.iter().enumerate().zip(by_lineup) {
        for ((l, spec), shots) in team.lineups.iter().enumerate().zip(team_shots) {
            lineups.push(LineupDataset { key: keys[t][l].clone(), total_minutes: spec.minutes, shots });
        }
    }

    let mut true_records = Vec::new();
    if let Some(model) = &cfg.game_model {
        true_records = simulate_scores(cfg, model, &grid, &truth, &lineups, &mut games)?;
    }

    Ok(SynthSeason {
        shots,
        pbp: events,
        games,
        truth,
        lineups,
        true_records,
    })
}

fn simulate_scores(
    cfg: &SynthConfig,
    model: &GameModel,
    grid: &CourtGrid,
    truth: &BTreeMap<PlayerId, Vec<f64>>,
    lineups: &[LineupDataset],
    games: &mut [GameInfo],
) -> Result<Vec<GameLplRecord>> {
    let part = RegionPartition::broad3(grid);
    let mut season: BTreeMap<PlayerId, Vec<u32>> = BTreeMap::new();
    for ds in lineups {
        for s in &ds.shots {
            if let Some(c) = s.cell(grid) {
                season.entry(s.player_id.clone()).or_insert_with(|| vec![0; grid.num_cells()])[c.0] += 1;
            }
        }
    }
    let empty = vec![0u32; grid.num_cells()];
    let rates: BTreeMap<PlayerId, Vec<f64>> = truth
        .iter()
        .map(|(p, surface)| (p.clone(), region_fgp(&part, surface, season.get(p).unwrap_or(&empty))))
        .collect();
    let totals: BTreeMap<PlayerId, u64> =
        season.iter().map(|(p, v)| (p.clone(), v.iter().map(|x| u64::from(*x)).sum())).collect();
    let ctx = GlplContext { partition: &part, grid, region_fgp: &rates, season_totals: &totals };
    let mut records = game_records(&ctx, lineups, games)?;

    let effects = team_effects(cfg, model);
    let index: BTreeMap<&str, usize> = cfg.teams.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    let noise = Normal::new(0.0, model.sigma).expect("validated sigma");
    let mut rng = task_rng(cfg.seed, "synth/scores");
    for (game, pair) in games.iter_mut().zip(records.chunks_mut(2)) {
        for rec in pair.iter_mut() {
            let (a, b) = (index[rec.team_id.as_str()], index[rec.opponent_id.as_str()]);
            let mean = model.mu
                + effects[a].0
                + effects[b].1
                + if rec.home { model.gamma } else { 0.0 }
                + model.theta * rec.tglpl;
            let score = (mean + noise.sample(&mut rng)).max(0.0);
            rec.score = Some(score);
            if rec.home {
                game.home_score = Some(score);
            } else {
                game.away_score = Some(score);
            }
        }
    }
    Ok(records)
}
