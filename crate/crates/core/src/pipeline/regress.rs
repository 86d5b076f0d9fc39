use std::collections::BTreeMap;

use rayon::prelude::*;

use super::analysis::SurfaceBuilder;
use super::config::{require_path, RunConfig};
use super::data::{load_ingested, Ingested};
use crate::court::RegionPartition;
use crate::error::{Error, Result};
use crate::ids::{PlayerId, TeamId};
use crate::inference::{
    fit_score_model, game_records, points_lost_summary, read_observations, region_fgp, write_observations,
    GameLplRecord, GlplContext, ParamSummary, ScoreObservation, TeamPointsLost,
};
use crate::io::{write_csv_with, write_json};

#[derive(Clone, Debug)]
pub struct RegressReport {
    pub observations: usize,
    pub converged: bool,
    pub max_rhat: f64,
    pub theta: ParamSummary,
    pub points_lost: Vec<TeamPointsLost>,
}

/// Per-game team records from ingested data: region FG% comes from the
/// backend's point estimate, weighted by each player's season attempts.
pub fn game_level_records(cfg: &RunConfig, data: &Ingested, seed: u64) -> Result<Vec<GameLplRecord>> {
    if data.games.is_empty() {
        return Err(Error::validation("no games with both teams resolved; regress needs games.csv"));
    }
    let builder = SurfaceBuilder::new(cfg, data, seed)?;
    let grid = builder.grid();
    let partition = RegionPartition::by_name(&cfg.glpl_partition, grid)?;
    let mut players: Vec<&PlayerId> = data.join.lineups.iter().flat_map(|l| l.key.players.iter()).collect();
    players.sort();
    players.dedup();
    let empty = vec![0u32; grid.num_cells()];
    let rates: Result<Vec<(PlayerId, Vec<f64>)>> = players
        .par_iter()
        .map(|p| {
            let surface = builder.point_estimate(p)?;
            let weights = data.join.season_cell_attempts.get(*p).unwrap_or(&empty);
            Ok(((*p).clone(), region_fgp(&partition, &surface, weights)))
        })
        .collect();
    let rates: BTreeMap<PlayerId, Vec<f64>> = rates?.into_iter().collect();
    let totals = data.season_totals();
    let ctx = GlplContext { partition: &partition, grid, region_fgp: &rates, season_totals: &totals };
    game_records(&ctx, &data.join.lineups, &data.games)
}

/// Fits the score regression and writes the posterior, a parameter summary
/// and the per-team points-lost table. Observations come from `observations`
/// when given, otherwise from ingested data and its game table.
pub fn cmd_regress(cfg: &RunConfig) -> Result<RegressReport> {
    let seed = cfg.require_seed()?;
    let out = cfg.out_dir().join("regress");
    let obs: Vec<ScoreObservation> = match (&cfg.observations, &cfg.data) {
        (Some(path), _) => read_observations(require_path(Some(path), "observations file")?)?,
        (None, Some(dir)) => {
            let data = load_ingested(require_path(Some(dir), "ingested data directory")?)?;
            let records = game_level_records(cfg, &data, seed)?;
            write_json(&out.join("game_records.json"), &records)?;
            records.iter().filter_map(GameLplRecord::observation).collect()
        }
        (None, None) => return Err(Error::Config("regress needs --observations or --data".into())),
    };
    write_csv_with(&out.join("observations.csv"), |buf| write_observations(buf, &obs))?;

    let post = fit_score_model(&obs, &cfg.score_model_config(seed))?;
    write_json(&out.join("posterior.json"), &post.to_file())?;
    write_csv_with(&out.join("summary.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["parameter", "mean", "hpd_low", "hpd_high", "rhat"])?;
        for (name, _) in post.parameters() {
            let s = post.summary(&name).expect("every parameter is summarized");
            w.write_record([name, format!("{}", s.mean), format!("{}", s.hpd_low), format!("{}", s.hpd_high), format!("{}", s.rhat)])?;
        }
        w.flush().map_err(|e| Error::io("summary.csv", e))?;
        Ok(())
    })?;

    let theta = post.theta_summary();
    let per_game: Vec<(TeamId, f64)> = obs.iter().map(|o| (o.team.clone(), o.tglpl)).collect();
    let table = points_lost_summary(theta.mean, &per_game);
    write_csv_with(&out.join("points_lost.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["team_id", "games", "mean", "q10", "median", "q90"])?;
        for t in &table {
            w.write_record([
                t.team.to_string(),
                t.games.to_string(),
                format!("{}", t.mean),
                format!("{}", t.q10),
                format!("{}", t.median),
                format!("{}", t.q90),
            ])?;
        }
        w.flush().map_err(|e| Error::io("points_lost.csv", e))?;
        Ok(())
    })?;

    Ok(RegressReport {
        observations: obs.len(),
        converged: post.converged(),
        max_rhat: post.max_rhat(),
        theta,
        points_lost: table,
    })
}
