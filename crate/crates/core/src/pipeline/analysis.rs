use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{require_path, RunConfig};
use super::data::{load_ingested, select_lineups, Ingested};
use crate::court::CourtGrid;
use crate::error::{Error, Result};
use crate::ids::{LineupKey, PlayerId};
use crate::inference::{permutation_test, PermTestResult};
use crate::io::{write_csv_with, write_json, GridFile};
use crate::metrics::{lineup_metrics, tie_priority, Five, MetricSurfaces, RANK_QUANTILES};
use crate::rng::derive_seed;
use crate::surfaces::{
    estimate_fga, EstimatorRegistry, FgPctPosterior, FgaSmoother, FgaSurface, FgpEstimator, FgpInput, ShotSample,
    SmootherParams, SmootherRegistry,
};

const HISTOGRAM_BINS: usize = 20;

/// Replaces characters that are awkward in file names.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// FG% and FGA surfaces for one lineup, in lineup-key player order.
pub struct LineupSurfaces {
    pub key: LineupKey,
    pub posteriors: Vec<FgPctPosterior>,
    pub fga: Vec<FgaSurface>,
    pub tie: Five<usize>,
}

impl LineupSurfaces {
    pub fn posterior_refs(&self) -> Five<&FgPctPosterior> {
        std::array::from_fn(|j| &self.posteriors[j])
    }

    pub fn fga_refs(&self) -> Five<&FgaSurface> {
        std::array::from_fn(|j| &self.fga[j])
    }
}

/// Builds lineup surfaces from ingested data with the configured backend and
/// smoother. Player posteriors are seeded per player, so they do not depend
/// on which lineups are requested.
pub struct SurfaceBuilder<'a> {
    data: &'a Ingested,
    grid: CourtGrid,
    estimator: Box<dyn FgpEstimator>,
    smoother: Box<dyn FgaSmoother>,
    league: Vec<ShotSample>,
    by_player: BTreeMap<PlayerId, Vec<ShotSample>>,
    totals: BTreeMap<PlayerId, u64>,
    draws: usize,
    seed: u64,
}

impl<'a> SurfaceBuilder<'a> {
    pub fn new(cfg: &RunConfig, data: &'a Ingested, seed: u64) -> Result<Self> {
        if cfg.draws == 0 {
            return Err(Error::Config("draws must be at least 1".into()));
        }
        let grid = CourtGrid::new();
        let estimator = EstimatorRegistry::with_builtins().create(&cfg.backend, &cfg.fgp, &grid)?;
        let smoother = SmootherRegistry::with_builtins()
            .create(&cfg.smoother, &SmootherParams { bandwidth: cfg.bandwidth })?;
        let mut league = Vec::new();
        let mut by_player: BTreeMap<PlayerId, Vec<ShotSample>> = BTreeMap::new();
        for lineup in &data.join.lineups {
            for shot in &lineup.shots {
                let sample = ShotSample { cell: shot.cell(&grid), made: shot.made };
                league.push(sample);
                by_player.entry(shot.player_id.clone()).or_default().push(sample);
            }
        }
        Ok(Self {
            data,
            grid,
            estimator,
            smoother,
            league,
            by_player,
            totals: data.season_totals(),
            draws: cfg.draws,
            seed,
        })
    }

    pub fn grid(&self) -> &CourtGrid {
        &self.grid
    }

    fn input<'b>(&'b self, player: &'b PlayerId) -> FgpInput<'b> {
        FgpInput {
            player,
            shots: self.by_player.get(player).map_or(&[], Vec::as_slice),
            league: &self.league,
        }
    }

    pub fn posterior(&self, player: &PlayerId) -> Result<FgPctPosterior> {
        let seed = derive_seed(self.seed, &format!("fgp/{player}"));
        self.estimator.posterior(&self.input(player), self.draws, seed)
    }

    /// Analytic point estimate; used where draws are not needed.
    pub fn point_estimate(&self, player: &PlayerId) -> Result<Vec<f64>> {
        self.estimator.point_estimate(&self.input(player))
    }

    /// Surfaces for one lineup; the five posteriors are fitted in parallel.
    pub fn lineup(&self, key: &LineupKey) -> Result<LineupSurfaces> {
        let dataset = self.data.lineup(key).ok_or_else(|| Error::UnknownLineup {
            requested: key.id(),
            available: String::new(),
        })?;
        let posteriors: Vec<FgPctPosterior> = key.players.par_iter().map(|p| self.posterior(p)).collect::<Result<_>>()?;
        let fga: Vec<FgaSurface> = key
            .players
            .iter()
            .map(|p| estimate_fga(dataset, p, self.smoother.as_ref(), &self.grid))
            .collect::<Result<_>>()?;
        let season: Five<u64> = std::array::from_fn(|j| self.totals.get(&key.players[j]).copied().unwrap_or(0));
        Ok(LineupSurfaces { key: key.clone(), posteriors, fga, tie: tie_priority(&key.players, &season) })
    }
}

struct Prepared {
    data: Ingested,
    keys: Vec<LineupKey>,
    seed: u64,
    out: PathBuf,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let seed = cfg.require_seed()?;
    let dir = require_path(cfg.data.as_ref(), "ingested data directory (--data)")?;
    if let Some(d) = cfg.fgp.fgp_dir.as_ref() {
        require_path(Some(d), "external FG% directory")?;
    }
    let data = load_ingested(dir)?;
    let keys = select_lineups(&data, &cfg.lineups)?;
    Ok(Prepared { data, keys, seed, out: cfg.out_dir() })
}

fn for_each_lineup<T>(
    cfg: &RunConfig,
    prepared: &Prepared,
    mut f: impl FnMut(&SurfaceBuilder<'_>, &LineupSurfaces) -> Result<T>,
) -> Result<Vec<T>> {
    let builder = SurfaceBuilder::new(cfg, &prepared.data, prepared.seed)?;
    prepared
        .keys
        .iter()
        .map(|key| {
            let surfaces = builder.lineup(key)?;
            f(&builder, &surfaces)
        })
        .collect()
}

/// Writes FG% mean surfaces for every selected player and FGA-per-36
/// surfaces for every selected lineup.
pub fn cmd_surfaces(cfg: &RunConfig) -> Result<Vec<LineupKey>> {
    let prepared = prepare(cfg)?;
    let root = prepared.out.join("surfaces");
    let mut written = BTreeSet::new();
    for_each_lineup(cfg, &prepared, |_, s| {
        for post in &s.posteriors {
            if written.insert(post.player_id.clone()) {
                let stem = file_stem(post.player_id.as_str());
                post.mean_file().write(&root.join("fgp").join(format!("{stem}_mean.json")))?;
                if cfg.write_draws {
                    post.draws_file().write(&root.join("fgp").join(format!("{stem}_draws.json")))?;
                }
            }
        }
        let dir = root.join(file_stem(&s.key.id()));
        for fga in &s.fga {
            fga.to_file().write(&dir.join(format!("fga_{}.json", file_stem(fga.player_id.as_str()))))?;
        }
        Ok(s.key.clone())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over the data range; a degenerate range gets one bin.
    pub fn of(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.is_empty() {
            return Self { edges: Vec::new(), counts: Vec::new() };
        }
        if !(hi > lo) || bins <= 1 {
            return Self { edges: vec![lo, hi], counts: vec![values.len()] };
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + width * k as f64 }).collect();
        let mut counts = vec![0; bins];
        for v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineupTotals {
    pub lineup: String,
    pub players: Vec<PlayerId>,
    pub backend: String,
    pub draws: usize,
    /// Sum of per-36 LPL over all cells, at posterior-mean FG%.
    pub total_lpl: f64,
    pub total_lpl_draws: Vec<f64>,
    pub histogram: Histogram,
}

fn write_metric_files(dir: &Path, s: &LineupSurfaces, m: &MetricSurfaces) -> Result<()> {
    let lineup = Some(s.key.id());
    let grid = |kind: &str, player: Option<&PlayerId>, values: Vec<f64>| -> Result<()> {
        let name = match player {
            Some(p) => format!("{kind}_{}.json", file_stem(p.as_str())),
            None => format!("{kind}.json"),
        };
        GridFile::single(kind, player.map(|p| p.0.clone()), lineup.clone(), values).write(&dir.join(name))
    };
    grid("lpl36", None, m.lpl.clone())?;
    grid("lpl_per_shot", None, m.lpl_per_shot.clone())?;
    for (j, p) in s.key.players.iter().enumerate() {
        grid("rank_fgp", Some(p), m.rank_fgp_map.iter().map(|r| f64::from(r[j])).collect())?;
        grid("rank_fga", Some(p), m.rank_fga.iter().map(|r| f64::from(r[j])).collect())?;
        grid("rank_corr", Some(p), m.rank_correspondence.iter().map(|r| f64::from(r[j])).collect())?;
        grid("plc36", Some(p), m.plc_for(j))?;
        grid("plc_per_shot", Some(p), m.plc_per_shot_for(j))?;
        for (q, level) in RANK_QUANTILES.iter().enumerate() {
            let values = m.rank_summaries.iter().map(|c| f64::from(c.quantiles[j][q])).collect();
            grid(&format!("rank_fgp_q{level}"), Some(p), values)?;
        }
    }
    Ok(())
}

/// Computes and writes every lineup surface plus a totals summary.
pub fn cmd_metrics(cfg: &RunConfig) -> Result<Vec<LineupTotals>> {
    let prepared = prepare(cfg)?;
    let root = prepared.out.join("metrics");
    let totals = for_each_lineup(cfg, &prepared, |builder, s| {
        let m = lineup_metrics(&s.posterior_refs(), &s.fga_refs(), builder.grid(), &s.tie)?;
        let dir = root.join(file_stem(&s.key.id()));
        write_metric_files(&dir, s, &m)?;
        let totals = LineupTotals {
            lineup: s.key.id(),
            players: s.key.players.to_vec(),
            backend: cfg.backend.clone(),
            draws: cfg.draws,
            total_lpl: m.total_lpl,
            histogram: Histogram::of(&m.lpl_draws, HISTOGRAM_BINS),
            total_lpl_draws: m.lpl_draws,
        };
        write_json(&dir.join("totals.json"), &totals)?;
        Ok(totals)
    })?;
    write_csv_with(&root.join("summary.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["lineup", "team_id", "total_lpl36"])?;
        for t in &totals {
            let team = t.lineup.split(':').next().unwrap_or_default();
            w.write_record([t.lineup.as_str(), team, &format!("{}", t.total_lpl)])?;
        }
        w.flush().map_err(|e| Error::io("summary.csv", e))?;
        Ok(())
    })?;
    Ok(totals)
}

/// Runs the permutation test for every selected lineup.
pub fn cmd_permtest(cfg: &RunConfig) -> Result<Vec<PermTestResult>> {
    let prepared = prepare(cfg)?;
    let root = prepared.out.join("permtest");
    let results = for_each_lineup(cfg, &prepared, |builder, s| {
        let id = s.key.id();
        let r = permutation_test(&id, &s.posterior_refs(), &s.fga_refs(), builder.grid(), cfg.variates, prepared.seed)?;
        write_json(&root.join(format!("{}.json", file_stem(&id))), &r)?;
        Ok(r)
    })?;
    write_csv_with(&root.join("summary.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["lineup", "team_id", "S", "p_hat"])?;
        for r in &results {
            let team = r.lineup.split(':').next().unwrap_or_default();
            w.write_record([r.lineup.as_str(), team, &r.s.to_string(), &format!("{}", r.p_hat)])?;
        }
        w.flush().map_err(|e| Error::io("summary.csv", e))?;
        Ok(())
    })?;
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let h = Histogram::of(&[0.0, 0.5, 1.0, 1.0, 0.25], 4);
        assert_eq!(h.edges.len(), 5);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);
        assert_eq!(h.counts[3], 2);
        let flat = Histogram::of(&[2.0; 7], 20);
        assert_eq!(flat.counts, vec![7]);
        assert_eq!(flat.edges, vec![2.0, 2.0]);
    }

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("CLE:1-2-3/4"), "CLE_1-2-3_4");
    }
}
