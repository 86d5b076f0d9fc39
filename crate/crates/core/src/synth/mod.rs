//! Synthetic seasons with known ground truth, and brute-force oracles.

mod config;
mod scores;
mod season;

pub use config::{
    AllocationPolicy, FgpCurve, GameModel, LineupSpec, LocationMixture, PlayerCurve, SynthConfig, TeamSpec,
};
pub use scores::{simulate_score_observations, ScoreSimConfig, SimulatedScores};
pub use season::{generate_season, SynthSeason};

use crate::metrics::{Five, LINEUP_SIZE};

/// Exhaustive lineup points lost: the best of all 120 reorderings of `a`
/// minus the observed allocation. Shares no code with the metric itself.
pub fn oracle_lpl(value: f64, xi: &Five<f64>, a: &Five<f64>) -> f64 {
    let observed: f64 = (0..LINEUP_SIZE).map(|j| value * xi[j] * a[j]).sum();
    let mut best = f64::NEG_INFINITY;
    let mut perm: Five<usize> = [0, 1, 2, 3, 4];
    heap_permutations(&mut perm, LINEUP_SIZE, &mut |p| {
        let s: f64 = (0..LINEUP_SIZE).map(|j| value * xi[j] * a[p[j]]).sum();
        best = best.max(s);
    });
    best - observed
}

/// Heap's algorithm; calls `f` once for each of the `k!` orderings.
fn heap_permutations(perm: &mut Five<usize>, k: usize, f: &mut impl FnMut(&Five<usize>)) {
    if k == 1 {
        f(perm);
        return;
    }
    for i in 0..k {
        heap_permutations(perm, k - 1, f);
        if k.is_multiple_of(2) {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}
