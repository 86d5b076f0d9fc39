use super::{rank_vector, Five, LINEUP_SIZE};
use crate::court::CellIndex;
use crate::error::{Error, Result};
use crate::surfaces::FgPctPosterior;

/// Quantile levels (percent) reported for FG% ranks.
pub const RANK_QUANTILES: [u32; 3] = [20, 50, 80];

/// Posterior distribution of FG% ranks in one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellRankSummary {
    /// `pmf[j][r - 1]`: probability that player `j` has rank `r`.
    pub pmf: Five<Five<f64>>,
    /// Per-player modal rank, ties toward the better rank. Need not be a
    /// permutation across players.
    pub marginal_map: Five<u8>,
    /// Most frequent joint ranking across draws; always a permutation.
    pub joint_map: Five<u8>,
    /// 20/50/80% quantiles of each player's rank.
    pub quantiles: Five<[u8; 3]>,
}

/// Encodes a rank vector with the highest-priority slot as the most
/// significant digit, so smaller codes favour higher-priority players.
pub(crate) fn encode(ranks: &Five<u8>, tie: &Five<usize>) -> u32 {
    let mut by_priority = [0u8; LINEUP_SIZE];
    for j in 0..LINEUP_SIZE {
        by_priority[tie[j]] = ranks[j];
    }
    by_priority.iter().fold(0u32, |acc, &r| acc * 8 + u32::from(r))
}

fn decode(code: u32, tie: &Five<usize>) -> Five<u8> {
    let mut by_priority = [0u8; LINEUP_SIZE];
    let mut c = code;
    for k in (0..LINEUP_SIZE).rev() {
        by_priority[k] = (c % 8) as u8;
        c /= 8;
    }
    let mut ranks = [0u8; LINEUP_SIZE];
    for j in 0..LINEUP_SIZE {
        ranks[j] = by_priority[tie[j]];
    }
    ranks
}

/// Ranks every joint posterior draw in `cell` and summarizes the result.
pub fn fgp_rank_summaries(
    posteriors: &Five<&FgPctPosterior>,
    cell: CellIndex,
    tie: &Five<usize>,
) -> Result<CellRankSummary> {
    let draws = posteriors[0].num_draws();
    if let Some(p) = posteriors.iter().find(|p| p.num_draws() != draws) {
        return Err(Error::Dimension(format!(
            "player {} has {} draws, expected {draws}",
            p.player_id,
            p.num_draws()
        )));
    }
    let mut counts = [[0usize; LINEUP_SIZE]; LINEUP_SIZE];
    let mut codes = Vec::with_capacity(draws);
    for s in 0..draws {
        let xi: Five<f64> = std::array::from_fn(|j| posteriors[j].draw(s)[cell.0]);
        let ranks = rank_vector(&xi, tie);
        for j in 0..LINEUP_SIZE {
            counts[j][ranks[j] as usize - 1] += 1;
        }
        codes.push(encode(&ranks, tie));
    }
    Ok(summarize(&counts, codes, draws, tie))
}

pub(crate) fn summarize(
    counts: &Five<Five<usize>>,
    mut codes: Vec<u32>,
    draws: usize,
    tie: &Five<usize>,
) -> CellRankSummary {
    let pmf = counts.map(|row| row.map(|c| c as f64 / draws as f64));
    let marginal_map = counts.map(|row| {
        let mut best = 0;
        for r in 1..LINEUP_SIZE {
            if row[r] > row[best] {
                best = r;
            }
        }
        best as u8 + 1
    });
    let quantiles = counts.map(|row| {
        RANK_QUANTILES.map(|q| {
            let mut cum = 0usize;
            for (r, c) in row.iter().enumerate() {
                cum += c;
                // cum / draws >= q / 100, in integers
                if cum * 100 >= q as usize * draws {
                    return r as u8 + 1;
                }
            }
            LINEUP_SIZE as u8
        })
    });
    codes.sort_unstable();
    let (mut best_code, mut best_run) = (codes[0], 0);
    let mut i = 0;
    while i < codes.len() {
        let mut k = i;
        while k < codes.len() && codes[k] == codes[i] {
            k += 1;
        }
        if k - i > best_run {
            best_run = k - i;
            best_code = codes[i];
        }
        i = k;
    }
    CellRankSummary {
        pmf,
        marginal_map,
        joint_map: decode(best_code, tie),
        quantiles,
    }
}
