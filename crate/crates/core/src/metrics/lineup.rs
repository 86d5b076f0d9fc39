use rayon::prelude::*;

use super::ranks::{summarize, CellRankSummary};
use super::{
    lpl_with_reallocation, lpl_per_shot, plc_cell, plc_per_shot, rank_correspondence, rank_vector,
    Five, LINEUP_SIZE,
};
use crate::court::CourtGrid;
use crate::error::{Error, Result};
use crate::surfaces::{FgPctPosterior, FgaSurface};

/// Full set of lineup surfaces. Per-player vectors are indexed by lineup slot.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSurfaces {
    pub rank_fgp_map: Vec<Five<u8>>,
    pub rank_fga: Vec<Five<u8>>,
    pub rank_correspondence: Vec<Five<i8>>,
    pub rank_summaries: Vec<CellRankSummary>,
    pub lpl: Vec<f64>,
    pub lpl_per_shot: Vec<f64>,
    pub plc: Vec<Five<f64>>,
    pub plc_per_shot: Vec<Five<f64>>,
    pub total_lpl: f64,
    /// Total LPL recomputed under each joint posterior draw.
    pub lpl_draws: Vec<f64>,
}

impl MetricSurfaces {
    pub fn plc_for(&self, slot: usize) -> Vec<f64> {
        self.plc.iter().map(|p| p[slot]).collect()
    }

    pub fn plc_per_shot_for(&self, slot: usize) -> Vec<f64> {
        self.plc_per_shot.iter().map(|p| p[slot]).collect()
    }
}

fn check_dimensions(posteriors: &Five<&FgPctPosterior>, fga: &Five<&FgaSurface>, grid: &CourtGrid) -> Result<usize> {
    let m = grid.num_cells();
    let draws = posteriors[0].num_draws();
    for p in posteriors {
        if p.num_cells() != m {
            return Err(Error::Dimension(format!("FG% surface for {} has {} cells, grid has {m}", p.player_id, p.num_cells())));
        }
        if p.num_draws() != draws {
            return Err(Error::Dimension(format!("player {} has {} draws, expected {draws}", p.player_id, p.num_draws())));
        }
    }
    for f in fga {
        if f.per36.len() != m {
            return Err(Error::Dimension(format!("FGA surface for {} has {} cells, grid has {m}", f.player_id, f.per36.len())));
        }
    }
    Ok(draws)
}

/// Computes every lineup surface. Point surfaces use posterior means; FG%
/// ranks use the joint MAP ranking; `lpl_draws` re-ranks and re-weights per draw.
pub fn lineup_metrics(
    posteriors: &Five<&FgPctPosterior>,
    fga: &Five<&FgaSurface>,
    grid: &CourtGrid,
    tie: &Five<usize>,
) -> Result<MetricSurfaces> {
    let draws = check_dimensions(posteriors, fga, grid)?;
    let values: Vec<f64> = grid.values().iter().map(|v| v.points()).collect();
    let a_of = |i: usize| -> Five<f64> { std::array::from_fn(|j| fga[j].per36[i]) };

    let per_cell: Vec<_> = (0..grid.num_cells())
        .into_par_iter()
        .map(|i| {
            let a = a_of(i);
            let xi: Five<f64> = std::array::from_fn(|j| posteriors[j].mean()[i]);
            let mut counts = [[0usize; LINEUP_SIZE]; LINEUP_SIZE];
            let mut codes = Vec::with_capacity(draws);
            for s in 0..draws {
                let d: Five<f64> = std::array::from_fn(|j| posteriors[j].draw(s)[i]);
                let ranks = rank_vector(&d, tie);
                for j in 0..LINEUP_SIZE {
                    counts[j][ranks[j] as usize - 1] += 1;
                }
                codes.push(super::ranks::encode(&ranks, tie));
            }
            let summary = summarize(&counts, codes, draws, tie);
            let fga_ranks = rank_vector(&a, tie);
            let (lpl, plc) = if a.iter().any(|v| *v > 0.0) {
                let (lpl, star) = lpl_with_reallocation(values[i], &xi, &a, tie);
                (lpl, plc_cell(lpl, &a, &star))
            } else {
                (0.0, [0.0; LINEUP_SIZE])
            };
            let rc = rank_correspondence(&fga_ranks, &summary.joint_map);
            (summary, fga_ranks, rc, lpl, lpl_per_shot(lpl, &a), plc, plc_per_shot(&plc, &a))
        })
        .collect();

    let active: Vec<usize> = (0..grid.num_cells())
        .filter(|&i| fga.iter().any(|f| f.per36[i] > 0.0))
        .collect();
    let lpl_draws: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|s| {
            let mut total = 0.0;
            for &i in &active {
                let d: Five<f64> = std::array::from_fn(|j| posteriors[j].draw(s)[i]);
                total += lpl_with_reallocation(values[i], &d, &a_of(i), tie).0;
            }
            total
        })
        .collect();

    let mut out = MetricSurfaces {
        rank_fgp_map: Vec::with_capacity(per_cell.len()),
        rank_fga: Vec::with_capacity(per_cell.len()),
        rank_correspondence: Vec::with_capacity(per_cell.len()),
        rank_summaries: Vec::with_capacity(per_cell.len()),
        lpl: Vec::with_capacity(per_cell.len()),
        lpl_per_shot: Vec::with_capacity(per_cell.len()),
        plc: Vec::with_capacity(per_cell.len()),
        plc_per_shot: Vec::with_capacity(per_cell.len()),
        total_lpl: 0.0,
        lpl_draws,
    };
    for (summary, fga_ranks, rc, lpl, lps, plc, pps) in per_cell {
        out.rank_fgp_map.push(summary.joint_map);
        out.rank_summaries.push(summary);
        out.rank_fga.push(fga_ranks);
        out.rank_correspondence.push(rc);
        out.total_lpl += lpl;
        out.lpl.push(lpl);
        out.lpl_per_shot.push(lps);
        out.plc.push(plc);
        out.plc_per_shot.push(pps);
    }
    Ok(out)
}
