//! Allocative-efficiency metrics for a five-player lineup.
//!
//! Within a cell, each player has a make probability `xi_j` and an attempt
//! rate `A_j`. The rank-matched reallocation `A*` hands the k-th largest
//! attempt value to the k-th best shooter; lineup points lost is the expected
//! points gained by moving from `A` to `A*`, and the player contribution splits
//! it by each player's share of the reallocated attempts.

mod lineup;
mod ranks;

pub use lineup::{lineup_metrics, MetricSurfaces};
pub use ranks::{fgp_rank_summaries, CellRankSummary, RANK_QUANTILES};

use crate::ids::PlayerId;

pub const LINEUP_SIZE: usize = 5;

pub type Five<T> = [T; LINEUP_SIZE];

/// Tie priority for each lineup slot: lower wins ties. Players are ordered by
/// descending season attempts, then ascending id.
pub fn tie_priority(players: &Five<PlayerId>, season_attempts: &Five<u64>) -> Five<usize> {
    let mut order: Five<usize> = [0, 1, 2, 3, 4];
    order.sort_by(|&a, &b| {
        season_attempts[b]
            .cmp(&season_attempts[a])
            .then_with(|| players[a].cmp(&players[b]))
    });
    let mut priority = [0; LINEUP_SIZE];
    for (pos, &slot) in order.iter().enumerate() {
        priority[slot] = pos;
    }
    priority
}

/// Slot order from best to worst: larger value first, ties by priority.
fn descending_order(values: &Five<f64>, tie: &Five<usize>) -> Five<usize> {
    let mut order: Five<usize> = [0, 1, 2, 3, 4];
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(tie[a].cmp(&tie[b])));
    order
}

/// Rank 1 for the largest value. The result is always a permutation of 1..=5.
pub fn rank_vector(values: &Five<f64>, tie: &Five<usize>) -> Five<u8> {
    let mut ranks = [0u8; LINEUP_SIZE];
    for (k, &slot) in descending_order(values, tie).iter().enumerate() {
        ranks[slot] = k as u8 + 1;
    }
    ranks
}

/// Rank-matched reallocation: the player with FG% rank k receives the k-th
/// largest entry of `fga`.
pub fn reallocate(fgp: &Five<f64>, fga: &Five<f64>, tie: &Five<usize>) -> Five<f64> {
    let mut sorted = *fga;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = [0.0; LINEUP_SIZE];
    for (k, &slot) in descending_order(fgp, tie).iter().enumerate() {
        out[slot] = sorted[k];
    }
    out
}

/// `sum_j v * xi_j * (A*_j - A_j)` for a given reallocation.
pub fn points_gained(value: f64, fgp: &Five<f64>, fga: &Five<f64>, a_star: &Five<f64>) -> f64 {
    let mut total = 0.0;
    for j in 0..LINEUP_SIZE {
        total += value * fgp[j] * (a_star[j] - fga[j]);
    }
    total
}

/// Lineup points lost in one cell, together with the reallocation used.
pub fn lpl_with_reallocation(value: f64, fgp: &Five<f64>, fga: &Five<f64>, tie: &Five<usize>) -> (f64, Five<f64>) {
    let a_star = reallocate(fgp, fga, tie);
    (points_gained(value, fgp, fga, &a_star).max(0.0), a_star)
}

pub fn lpl_cell(value: f64, fgp: &Five<f64>, fga: &Five<f64>, tie: &Five<usize>) -> f64 {
    lpl_with_reallocation(value, fgp, fga, tie).0
}

/// LPL per attempt; zero for cells without attempts.
pub fn lpl_per_shot(lpl: f64, fga: &Five<f64>) -> f64 {
    let total: f64 = fga.iter().sum();
    if total > 0.0 {
        lpl / total
    } else {
        0.0
    }
}

/// Signed share of the cell's LPL per player: positive for players who
/// should shoot more, negative for those who should shoot less.
pub fn plc_cell(lpl: f64, fga: &Five<f64>, a_star: &Five<f64>) -> Five<f64> {
    let denom: f64 = (0..LINEUP_SIZE).map(|j| (a_star[j] - fga[j]).abs()).sum();
    if denom == 0.0 {
        return [0.0; LINEUP_SIZE];
    }
    let mut out = [0.0; LINEUP_SIZE];
    for j in 0..LINEUP_SIZE {
        out[j] = lpl * (a_star[j] - fga[j]) / denom;
    }
    out
}

pub fn plc_per_shot(plc: &Five<f64>, fga: &Five<f64>) -> Five<f64> {
    let total: f64 = fga.iter().sum();
    if total > 0.0 {
        plc.map(|p| p / total)
    } else {
        [0.0; LINEUP_SIZE]
    }
}

/// FGA rank minus FG% rank, in -4..=4.
pub fn rank_correspondence(fga_ranks: &Five<u8>, fgp_ranks: &Five<u8>) -> Five<i8> {
    let mut out = [0i8; LINEUP_SIZE];
    for j in 0..LINEUP_SIZE {
        out[j] = fga_ranks[j] as i8 - fgp_ranks[j] as i8;
    }
    out
}
