use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::court::CourtGrid;
use crate::error::{Error, Result};
use crate::metrics::{Five, LINEUP_SIZE};
use crate::rng::indexed_rng;
use crate::surfaces::{FgPctPosterior, FgaSurface};

pub const DEFAULT_VARIATES: usize = 500;

/// Monte-Carlo null distribution of the allocation statistic for one lineup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    pub lineup: String,
    #[serde(rename = "S")]
    pub s: usize,
    pub p_hat: f64,
    pub variates: Vec<f64>,
}

impl PermTestResult {
    pub fn from_variates(lineup: impl Into<String>, variates: Vec<f64>) -> Self {
        let below = variates.iter().filter(|t| **t < 0.0).count();
        PermTestResult {
            lineup: lineup.into(),
            s: variates.len(),
            p_hat: below as f64 / variates.len() as f64,
            variates,
        }
    }
}

/// Draws `s` variates of `T = sum_i sum_j v_i xi_ij (A_ij - A'_ij)`, where
/// `xi` is a joint posterior draw and `A'_i` an independent uniform
/// permutation of the observed attempts in each cell. `T < 0` means the
/// random allocation would have scored more than the observed one.
pub fn permutation_test(
    lineup: &str,
    posteriors: &Five<&FgPctPosterior>,
    fga: &Five<&FgaSurface>,
    grid: &CourtGrid,
    s: usize,
    seed: u64,
) -> Result<PermTestResult> {
    if s == 0 {
        return Err(Error::Config("permutation test needs at least one variate".into()));
    }
    let m = grid.num_cells();
    let draws = posteriors[0].num_draws();
    for p in posteriors {
        if p.num_cells() != m || p.num_draws() != draws {
            return Err(Error::Dimension(format!(
                "posterior for {} is {} draws x {} cells; expected {draws} x {m}",
                p.player_id,
                p.num_draws(),
                p.num_cells()
            )));
        }
    }
    if let Some(f) = fga.iter().find(|f| f.per36.len() != m) {
        return Err(Error::Dimension(format!("FGA surface for {} has {} cells", f.player_id, f.per36.len())));
    }

    let values = grid.values();
    // Cells where every attempt is zero contribute nothing under any permutation.
    let active: Vec<(usize, f64, Five<f64>)> = (0..m)
        .filter_map(|i| {
            let a: Five<f64> = std::array::from_fn(|j| fga[j].per36[i]);
            a.iter().any(|v| *v != 0.0).then(|| (i, values[i].points(), a))
        })
        .collect();

    let key = format!("permtest/{lineup}");
    let variates: Vec<f64> = (0..s)
        .into_par_iter()
        .map(|k| {
            let mut rng = indexed_rng(seed, &key, k as u64);
            let d = rng.random_range(0..draws);
            let xi: Five<&[f64]> = std::array::from_fn(|j| posteriors[j].draw(d));
            let mut t = 0.0;
            for (i, v, a) in &active {
                let mut dagger = *a;
                dagger.shuffle(&mut rng);
                let mut cell = 0.0;
                for j in 0..LINEUP_SIZE {
                    cell += xi[j][*i] * (a[j] - dagger[j]);
                }
                t += v * cell;
            }
            t
        })
        .collect();
    Ok(PermTestResult::from_variates(lineup, variates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::court::Point;
    use crate::ids::{LineupKey, PlayerId};

    fn key() -> LineupKey {
        LineupKey::new("T".into(), ["a", "b", "c", "d", "e"].map(PlayerId::from))
    }

    fn setup(xi: Five<f64>, a_of: impl Fn(usize, usize) -> f64) -> (Vec<FgPctPosterior>, Vec<FgaSurface>) {
        let posts = (0..5)
            .map(|j| FgPctPosterior::degenerate(key().players[j].clone(), "t", &vec![xi[j]; 2350], 1).unwrap())
            .collect();
        let fga = (0..5)
            .map(|j| FgaSurface {
                lineup: key(),
                player_id: key().players[j].clone(),
                per36: (0..2350).map(|i| a_of(i, j)).collect(),
                raw_count: 0,
                minutes: 36.0,
            })
            .collect();
        (posts, fga)
    }

    fn run(posts: &[FgPctPosterior], fga: &[FgaSurface], s: usize, seed: u64) -> PermTestResult {
        let p: Five<&FgPctPosterior> = std::array::from_fn(|j| &posts[j]);
        let f: Five<&FgaSurface> = std::array::from_fn(|j| &fga[j]);
        permutation_test("T", &p, &f, &CourtGrid::new(), s, seed).unwrap()
    }

    #[test]
    fn equal_attempts_give_zero_statistic() {
        let (posts, fga) = setup([0.5, 0.4, 0.3, 0.2, 0.1], |_, _| 2.0);
        let r = run(&posts, &fga, 20, 1);
        assert!(r.variates.iter().all(|t| *t == 0.0));
        assert_eq!(r.p_hat, 0.0);
    }

    #[test]
    fn matched_allocation_never_loses() {
        let (posts, fga) = setup([0.5, 0.4, 0.3, 0.2, 0.1], |i, j| if i % 7 == 0 { 5.0 - j as f64 } else { 0.0 });
        let r = run(&posts, &fga, 200, 2);
        assert!(r.variates.iter().all(|t| *t >= 0.0));
        assert_eq!(r.p_hat, 0.0);
    }

    #[test]
    fn inverted_allocation_almost_always_loses() {
        let (posts, fga) = setup([0.5, 0.4, 0.3, 0.2, 0.1], |i, j| if i % 7 == 0 { 1.0 + j as f64 } else { 0.0 });
        let r = run(&posts, &fga, 200, 3);
        assert!(r.p_hat > 0.95, "{}", r.p_hat);
    }

    #[test]
    fn variate_count_and_p_hat_definition() {
        let g = CourtGrid::new();
        let cell = g.cell_of(Point::new(25.5, 10.5)).unwrap().0;
        let (posts, fga) = setup([0.5, 0.45, 0.4, 0.35, 0.3], |i, j| if i == cell { [1.0, 4.0, 2.0, 0.0, 3.0][j] } else { 0.0 });
        let r = run(&posts, &fga, 100, 4);
        assert_eq!(r.variates.len(), 100);
        assert_eq!(r.s, 100);
        let below = r.variates.iter().filter(|t| **t < 0.0).count();
        assert_eq!(r.p_hat, below as f64 / 100.0);
    }

    #[test]
    fn identical_seeds_reproduce_variates() {
        let (posts, fga) = setup([0.5, 0.45, 0.4, 0.35, 0.3], |i, j| ((i * 7 + j * 3) % 5) as f64);
        assert_eq!(run(&posts, &fga, 50, 9), run(&posts, &fga, 50, 9));
        assert_ne!(run(&posts, &fga, 50, 9).variates, run(&posts, &fga, 50, 10).variates);
    }

    #[test]
    fn zero_variates_is_rejected() {
        let (posts, fga) = setup([0.5; 5], |_, _| 1.0);
        let p: Five<&FgPctPosterior> = std::array::from_fn(|j| &posts[j]);
        let f: Five<&FgaSurface> = std::array::from_fn(|j| &fga[j]);
        assert!(permutation_test("T", &p, &f, &CourtGrid::new(), 0, 1).is_err());
    }
}
