//! Per-player FG% posteriors and per-lineup FGA-per-36 surfaces.
//!
//! FG% estimation and FGA smoothing are both strategy families: backends
//! implement [`FgpEstimator`] or [`FgaSmoother`] and are looked up by name in
//! an [`EstimatorRegistry`] / [`SmootherRegistry`].

mod estimators;
mod smoothing;

pub use estimators::{
    BackendParams, EmpiricalBeta, EstimatorRegistry, ExternalSurfaces, FgpEstimator, FgpInput,
    ShotSample, ShrunkBeta,
};
pub use smoothing::{
    estimate_fga, FgaSmoother, GaussianKernel, NoSmoothing, SmootherParams, SmootherRegistry,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{LineupKey, PlayerId};
use crate::io::{GridFile, GridValues};

/// Posterior draws of a player's make probability in every grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FgPctPosterior {
    pub player_id: PlayerId,
    pub backend: String,
    num_cells: usize,
    num_draws: usize,
    draws: Vec<f64>,
    mean: Vec<f64>,
}

impl FgPctPosterior {
    /// Builds a posterior from a row-major `draws x cells` matrix.
    pub fn from_draws(
        player_id: PlayerId,
        backend: impl Into<String>,
        num_cells: usize,
        draws: Vec<f64>,
    ) -> Result<Self> {
        if num_cells == 0 || draws.is_empty() || !draws.len().is_multiple_of(num_cells) {
            return Err(Error::Dimension(format!(
                "{} draw values do not form rows of {num_cells} cells",
                draws.len()
            )));
        }
        if let Some(bad) = draws.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::validation(format!(
                "FG% draw {bad} for player {player_id} outside (0, 1)"
            )));
        }
        let num_draws = draws.len() / num_cells;
        let mut mean = vec![0.0; num_cells];
        for row in draws.chunks_exact(num_cells) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= num_draws as f64;
        }
        Ok(FgPctPosterior {
            player_id,
            backend: backend.into(),
            num_cells,
            num_draws,
            draws,
            mean,
        })
    }

    /// A point-mass posterior: every draw equals `values`.
    pub fn degenerate(player_id: PlayerId, backend: impl Into<String>, values: &[f64], num_draws: usize) -> Result<Self> {
        let mut draws = Vec::with_capacity(values.len() * num_draws.max(1));
        for _ in 0..num_draws.max(1) {
            draws.extend_from_slice(values);
        }
        let mut post = Self::from_draws(player_id, backend, values.len(), draws)?;
        post.mean = values.to_vec();
        Ok(post)
    }

    pub fn num_draws(&self) -> usize {
        self.num_draws
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn draw(&self, s: usize) -> &[f64] {
        &self.draws[s * self.num_cells..(s + 1) * self.num_cells]
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_file(&self) -> GridFile {
        GridFile::single("fgp_mean", Some(self.player_id.0.clone()), None, self.mean.clone())
    }

    pub fn draws_file(&self) -> GridFile {
        let mut file = self.mean_file();
        file.kind = "fgp_draws".into();
        file.values = GridValues::Draws(self.draws.chunks_exact(self.num_cells).map(<[f64]>::to_vec).collect());
        file
    }
}

/// Attempts per 36 minutes for one player inside one lineup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgaSurface {
    pub lineup: LineupKey,
    pub player_id: PlayerId,
    pub per36: Vec<f64>,
    /// In-grid attempts by the player while this lineup was on court.
    pub raw_count: u32,
    pub minutes: f64,
}

impl FgaSurface {
    /// Implied total attempts, `sum(per36) * minutes / 36`.
    pub fn implied_attempts(&self) -> f64 {
        self.per36.iter().sum::<f64>() * self.minutes / 36.0
    }

    pub fn to_file(&self) -> GridFile {
        GridFile::single(
            "fga_per36",
            Some(self.player_id.0.clone()),
            Some(self.lineup.id()),
            self.per36.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_is_average_of_draws() {
        let draws = vec![0.2, 0.4, 0.6, 0.8, 0.3, 0.5];
        let p = FgPctPosterior::from_draws("p".into(), "test", 2, draws).unwrap();
        assert_eq!(p.num_draws(), 3);
        assert!((p.mean()[0] - (0.2 + 0.6 + 0.3) / 3.0).abs() < 1e-12);
        assert!((p.mean()[1] - (0.4 + 0.8 + 0.5) / 3.0).abs() < 1e-12);
        assert_eq!(p.draw(1), &[0.6, 0.8]);
    }

    #[test]
    fn rejects_boundary_probabilities_and_ragged_draws() {
        assert!(FgPctPosterior::from_draws("p".into(), "t", 2, vec![0.0, 0.5]).is_err());
        assert!(FgPctPosterior::from_draws("p".into(), "t", 2, vec![1.0, 0.5]).is_err());
        assert!(FgPctPosterior::from_draws("p".into(), "t", 2, vec![0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn draws_file_has_one_row_per_draw() {
        let p = FgPctPosterior::degenerate("p".into(), "t", &vec![0.4; crate::court::NUM_CELLS], 3).unwrap();
        let f = p.draws_file();
        f.validate().unwrap();
        match f.values {
            GridValues::Draws(rows) => assert_eq!(rows.len(), 3),
            _ => panic!("expected draws"),
        }
    }
}
