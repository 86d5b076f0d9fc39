use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FgaSurface;
use crate::court::CourtGrid;
use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::ingest::LineupDataset;

/// Spreads binned attempt counts over the grid. Implementations must not move
/// mass off the grid; [`estimate_fga`] rescales to the exact count afterwards.
pub trait FgaSmoother: Send + Sync {
    fn name(&self) -> &str;
    fn smooth(&self, counts: &[f64], grid: &CourtGrid) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoSmoothing;

impl FgaSmoother for NoSmoothing {
    fn name(&self) -> &str {
        "none"
    }

    fn smooth(&self, counts: &[f64], _grid: &CourtGrid) -> Vec<f64> {
        counts.to_vec()
    }
}

/// Isotropic Gaussian kernel with standard deviation `bandwidth` feet. The
/// kernel is truncated at the court edges and renormalized per source cell.
#[derive(Clone, Copy, Debug)]
pub struct GaussianKernel {
    pub bandwidth: f64,
}

impl GaussianKernel {
    /// Row-stochastic weights `w[src][dst]` along one axis.
    fn axis_weights(&self, n: usize, cell_size: f64) -> Vec<Vec<f64>> {
        let two_var = 2.0 * self.bandwidth * self.bandwidth;
        (0..n)
            .map(|src| {
                let raw: Vec<f64> = (0..n)
                    .map(|dst| {
                        let d = (dst as f64 - src as f64) * cell_size;
                        (-d * d / two_var).exp()
                    })
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            })
            .collect()
    }
}

impl FgaSmoother for GaussianKernel {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn smooth(&self, counts: &[f64], grid: &CourtGrid) -> Vec<f64> {
        if self.bandwidth <= 0.0 {
            return counts.to_vec();
        }
        let (w, d) = (grid.width_cells, grid.depth_cells);
        let wx = self.axis_weights(w, grid.cell_size);
        let wy = self.axis_weights(d, grid.cell_size);
        // Separable: the 2-D kernel truncated to a rectangle factorizes, so
        // per-axis normalization conserves each source cell's mass.
        let mut along_x = vec![0.0; w * d];
        for row in 0..d {
            for src in 0..w {
                let v = counts[row * w + src];
                if v == 0.0 {
                    continue;
                }
                for (dst, k) in wx[src].iter().enumerate() {
                    along_x[row * w + dst] += v * k;
                }
            }
        }
        let mut out = vec![0.0; w * d];
        for src in 0..d {
            for col in 0..w {
                let v = along_x[src * w + col];
                if v == 0.0 {
                    continue;
                }
                for (dst, k) in wy[src].iter().enumerate() {
                    out[dst * w + col] += v * k;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmootherParams {
    pub bandwidth: f64,
}

impl Default for SmootherParams {
    fn default() -> Self {
        Self { bandwidth: 3.0 }
    }
}

type SmootherFactory = Box<dyn Fn(&SmootherParams) -> Result<Box<dyn FgaSmoother>> + Send + Sync>;

pub struct SmootherRegistry {
    factories: BTreeMap<String, SmootherFactory>,
}

impl Default for SmootherRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl SmootherRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self {
            factories: BTreeMap::new(),
        };
        reg.register("none", |_| Ok(Box::new(NoSmoothing)));
        reg.register("gaussian", |p| {
            if !(p.bandwidth >= 0.0 && p.bandwidth.is_finite()) {
                return Err(Error::Config(format!("bandwidth must be >= 0, got {}", p.bandwidth)));
            }
            Ok(Box::new(GaussianKernel { bandwidth: p.bandwidth }))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&SmootherParams) -> Result<Box<dyn FgaSmoother>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_owned(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, params: &SmootherParams) -> Result<Box<dyn FgaSmoother>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: "FGA smoother",
            name: name.to_owned(),
            registered: self.names().join(", "),
        })?;
        factory(params)
    }
}

/// Bins the player's in-grid attempts for this lineup, smooths, rescales to
/// the exact attempt count and converts to attempts per 36 minutes.
pub fn estimate_fga(
    dataset: &LineupDataset,
    player: &PlayerId,
    smoother: &dyn FgaSmoother,
    grid: &CourtGrid,
) -> Result<FgaSurface> {
    if !(dataset.total_minutes > 0.0) {
        return Err(Error::validation(format!(
            "lineup {} has no minutes; cannot normalize attempts",
            dataset.key
        )));
    }
    let mut counts = vec![0.0; grid.num_cells()];
    let mut raw_count = 0u32;
    for shot in dataset.player_shots(player) {
        if let Some(cell) = shot.cell(grid) {
            counts[cell.0] += 1.0;
            raw_count += 1;
        }
    }
    let mut surface = smoother.smooth(&counts, grid);
    let mass: f64 = surface.iter().sum();
    let per36_scale = 36.0 / dataset.total_minutes;
    if mass > 0.0 {
        let k = f64::from(raw_count) / mass;
        for v in &mut surface {
            *v *= k * per36_scale;
        }
    }
    Ok(FgaSurface {
        lineup: dataset.key.clone(),
        player_id: player.clone(),
        per36: surface,
        raw_count,
        minutes: dataset.total_minutes,
    })
}
