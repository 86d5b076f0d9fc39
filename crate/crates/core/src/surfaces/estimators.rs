use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::FgPctPosterior;
use crate::court::{CellIndex, CourtGrid, RegionPartition};
use crate::error::{Error, Result};
use crate::ids::PlayerId;
use crate::io::{GridFile, GridValues};
use crate::rng::task_rng;

/// Draws are kept strictly inside (0, 1).
const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotSample {
    pub cell: Option<CellIndex>,
    pub made: bool,
}

/// Season shots for the player being estimated, plus league-wide shots for
/// backends that borrow strength from the league.
#[derive(Clone, Debug)]
pub struct FgpInput<'a> {
    pub player: &'a PlayerId,
    pub shots: &'a [ShotSample],
    pub league: &'a [ShotSample],
}

pub trait FgpEstimator: Send + Sync {
    fn name(&self) -> &str;

    /// Posterior-mean FG% per cell, computed analytically where the backend allows.
    fn point_estimate(&self, input: &FgpInput<'_>) -> Result<Vec<f64>>;

    /// `draws` posterior samples. The generator is derived from `seed` and the
    /// player id, so results do not depend on evaluation order.
    fn posterior(&self, input: &FgpInput<'_>, draws: usize, seed: u64) -> Result<FgPctPosterior>;
}

/// Per-region Beta posterior shared by the two histogram backends.
struct RegionBeta {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl RegionBeta {
    fn means(&self) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| a / (a + b))
            .collect()
    }

    fn cell_means(&self, partition: &RegionPartition) -> Vec<f64> {
        let m = self.means();
        partition.region_of_cells().iter().map(|r| m[r.0 as usize]).collect()
    }

    fn sample(
        &self,
        backend: &str,
        partition: &RegionPartition,
        player: &PlayerId,
        draws: usize,
        seed: u64,
    ) -> Result<FgPctPosterior> {
        if draws == 0 {
            return Err(Error::Config("draw count must be positive".into()));
        }
        let dists = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| Beta::new(a, b).map_err(|e| Error::validation(format!("Beta({a}, {b}): {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = task_rng(seed, &format!("fgp/{backend}/{player}"));
        let cells = partition.region_of_cells();
        let mut out = Vec::with_capacity(draws * cells.len());
        let mut region_draw = vec![0.0; dists.len()];
        for _ in 0..draws {
            for (v, d) in region_draw.iter_mut().zip(&dists) {
                *v = d.sample(&mut rng).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            }
            out.extend(cells.iter().map(|r| region_draw[r.0 as usize]));
        }
        FgPctPosterior::from_draws(player.clone(), backend, cells.len(), out)
    }
}

fn region_counts(partition: &RegionPartition, shots: &[ShotSample]) -> (Vec<f64>, Vec<f64>) {
    let mut makes = vec![0.0; partition.num_regions()];
    let mut attempts = vec![0.0; partition.num_regions()];
    for s in shots {
        let r = partition.classify_location(s.cell).0 as usize;
        attempts[r] += 1.0;
        if s.made {
            makes[r] += 1.0;
        }
    }
    (makes, attempts)
}

/// Histogram estimator with pseudo-counts: a region with `m` makes in `a`
/// attempts gets the point estimate `(m + pseudo_makes) / (a + pseudo_attempts)`.
#[derive(Clone, Debug)]
pub struct EmpiricalBeta {
    pub partition: RegionPartition,
    pub pseudo_makes: f64,
    pub pseudo_attempts: f64,
}

impl EmpiricalBeta {
    pub fn new(partition: RegionPartition, pseudo_makes: f64, pseudo_attempts: f64) -> Result<Self> {
        if !(pseudo_makes >= 0.0 && pseudo_attempts > pseudo_makes) {
            return Err(Error::Config(format!(
                "pseudo counts need pseudo_attempts > pseudo_makes >= 0 (got {pseudo_makes}, {pseudo_attempts})"
            )));
        }
        Ok(Self {
            partition,
            pseudo_makes,
            pseudo_attempts,
        })
    }

    fn region_beta(&self, shots: &[ShotSample]) -> RegionBeta {
        let (makes, attempts) = region_counts(&self.partition, shots);
        RegionBeta {
            alpha: makes.iter().map(|m| m + self.pseudo_makes).collect(),
            beta: makes
                .iter()
                .zip(&attempts)
                .map(|(m, a)| a - m + self.pseudo_attempts - self.pseudo_makes)
                .collect(),
        }
    }

    /// Point estimate per region, in region id order.
    pub fn region_estimates(&self, shots: &[ShotSample]) -> Vec<f64> {
        self.region_beta(shots).means()
    }
}

impl FgpEstimator for EmpiricalBeta {
    fn name(&self) -> &str {
        "empirical"
    }

    fn point_estimate(&self, input: &FgpInput<'_>) -> Result<Vec<f64>> {
        Ok(self.region_beta(input.shots).cell_means(&self.partition))
    }

    fn posterior(&self, input: &FgpInput<'_>, draws: usize, seed: u64) -> Result<FgPctPosterior> {
        self.region_beta(input.shots)
            .sample(self.name(), &self.partition, input.player, draws, seed)
    }
}

/// Beta posterior whose prior mean is the league FG% in the region, with
/// prior weight `kappa` pseudo-attempts.
#[derive(Clone, Debug)]
pub struct ShrunkBeta {
    pub partition: RegionPartition,
    pub kappa: f64,
}

/// League rates are kept away from 0 and 1 so the prior stays proper.
const LEAGUE_RATE_BOUNDS: (f64, f64) = (1e-3, 1.0 - 1e-3);

impl ShrunkBeta {
    pub fn new(partition: RegionPartition, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { partition, kappa })
    }

    /// League FG% per region; regions without league attempts use the global rate.
    pub fn league_rates(&self, league: &[ShotSample]) -> Vec<f64> {
        let (makes, attempts) = region_counts(&self.partition, league);
        let total_a: f64 = attempts.iter().sum();
        let global = if total_a > 0.0 {
            makes.iter().sum::<f64>() / total_a
        } else {
            0.5
        };
        makes
            .iter()
            .zip(&attempts)
            .map(|(m, a)| if *a > 0.0 { m / a } else { global })
            .map(|p| p.clamp(LEAGUE_RATE_BOUNDS.0, LEAGUE_RATE_BOUNDS.1))
            .collect()
    }

    fn region_beta(&self, input: &FgpInput<'_>) -> RegionBeta {
        let prior = self.league_rates(input.league);
        let (makes, attempts) = region_counts(&self.partition, input.shots);
        RegionBeta {
            alpha: makes.iter().zip(&prior).map(|(m, p)| m + self.kappa * p).collect(),
            beta: makes
                .iter()
                .zip(&attempts)
                .zip(&prior)
                .map(|((m, a), p)| a - m + self.kappa * (1.0 - p))
                .collect(),
        }
    }
}

impl FgpEstimator for ShrunkBeta {
    fn name(&self) -> &str {
        "shrunk"
    }

    fn point_estimate(&self, input: &FgpInput<'_>) -> Result<Vec<f64>> {
        Ok(self.region_beta(input).cell_means(&self.partition))
    }

    fn posterior(&self, input: &FgpInput<'_>, draws: usize, seed: u64) -> Result<FgPctPosterior> {
        self.region_beta(input)
            .sample(self.name(), &self.partition, input.player, draws, seed)
    }
}

/// Surfaces computed elsewhere and loaded from grid files (`fgp_mean` and,
/// optionally, `fgp_draws`). Players without draws get a point-mass posterior.
#[derive(Clone, Debug, Default)]
pub struct ExternalSurfaces {
    means: BTreeMap<PlayerId, Vec<f64>>,
    draws: BTreeMap<PlayerId, Vec<Vec<f64>>>,
}

impl ExternalSurfaces {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_mean(&mut self, player: PlayerId, values: Vec<f64>) {
        self.means.insert(player, values);
    }

    pub fn insert_draws(&mut self, player: PlayerId, draws: Vec<Vec<f64>>) {
        self.draws.insert(player, draws);
    }

    pub fn players(&self) -> impl Iterator<Item = &PlayerId> {
        self.means.keys()
    }

    /// Loads every `*.json` grid file of kind `fgp_mean` / `fgp_draws` in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut out = Self::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let file = GridFile::read(&path)?;
            let Some(player) = file.player_id.clone().map(PlayerId) else {
                continue;
            };
            match (file.kind.as_str(), file.values) {
                ("fgp_mean", GridValues::Single(v)) => out.insert_mean(player, v),
                ("fgp_draws", GridValues::Draws(d)) => out.insert_draws(player, d),
                _ => {}
            }
        }
        Ok(out)
    }

    fn mean_for(&self, player: &PlayerId) -> Result<Vec<f64>> {
        if let Some(m) = self.means.get(player) {
            return Ok(m.clone());
        }
        if let Some(d) = self.draws.get(player) {
            let n = d.len() as f64;
            let mut mean = vec![0.0; d[0].len()];
            for row in d {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v / n;
                }
            }
            return Ok(mean);
        }
        Err(Error::validation(format!("no external FG% surface for player {player}")))
    }
}

impl FgpEstimator for ExternalSurfaces {
    fn name(&self) -> &str {
        "external"
    }

    fn point_estimate(&self, input: &FgpInput<'_>) -> Result<Vec<f64>> {
        self.mean_for(input.player)
    }

    fn posterior(&self, input: &FgpInput<'_>, draws: usize, _seed: u64) -> Result<FgPctPosterior> {
        match self.draws.get(input.player) {
            Some(d) => {
                let cells = d.first().map_or(0, Vec::len);
                FgPctPosterior::from_draws(input.player.clone(), self.name(), cells, d.concat())
            }
            None => FgPctPosterior::degenerate(input.player.clone(), self.name(), &self.mean_for(input.player)?, draws),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendParams {
    pub partition: String,
    pub pseudo_makes: f64,
    pub pseudo_attempts: f64,
    pub kappa: f64,
    /// Directory of grid files for the `external` backend.
    pub fgp_dir: Option<PathBuf>,
}

impl Default for BackendParams {
    fn default() -> Self {
        Self {
            partition: "empirical12".into(),
            pseudo_makes: 1.0,
            pseudo_attempts: 5.0,
            kappa: 10.0,
            fgp_dir: None,
        }
    }
}

type EstimatorFactory =
    Box<dyn Fn(&BackendParams, &CourtGrid) -> Result<Box<dyn FgpEstimator>> + Send + Sync>;

/// Name-indexed FG% backends.
pub struct EstimatorRegistry {
    factories: BTreeMap<String, EstimatorFactory>,
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("empirical", |p, g| {
            let part = RegionPartition::by_name(&p.partition, g)?;
            Ok(Box::new(EmpiricalBeta::new(part, p.pseudo_makes, p.pseudo_attempts)?))
        });
        reg.register("shrunk", |p, g| {
            let part = RegionPartition::by_name(&p.partition, g)?;
            Ok(Box::new(ShrunkBeta::new(part, p.kappa)?))
        });
        reg.register("external", |p, _| {
            let dir = p
                .fgp_dir
                .as_deref()
                .ok_or_else(|| Error::Config("the external backend needs fgp_dir".into()))?;
            Ok(Box::new(ExternalSurfaces::load_dir(dir)?))
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BackendParams, &CourtGrid) -> Result<Box<dyn FgpEstimator>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_owned(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, params: &BackendParams, grid: &CourtGrid) -> Result<Box<dyn FgpEstimator>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: "FG% backend",
            name: name.to_owned(),
            registered: self.names().join(", "),
        })?;
        factory(params, grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::court::{empirical12, Point};

    fn samples_in(grid: &CourtGrid, p: Point, makes: usize, attempts: usize) -> Vec<ShotSample> {
        let cell = grid.cell_of(p);
        (0..attempts)
            .map(|i| ShotSample { cell, made: i < makes })
            .collect()
    }

    fn empirical(grid: &CourtGrid) -> EmpiricalBeta {
        EmpiricalBeta::new(RegionPartition::empirical12(grid), 1.0, 5.0).unwrap()
    }

    #[test]
    fn empirical_pseudo_counts_match_reference_values() {
        let g = CourtGrid::new();
        let est = empirical(&g);
        let mut shots = samples_in(&g, Point::new(25.5, 30.5), 8, 26);
        shots.extend(samples_in(&g, Point::new(1.5, 3.5), 4, 6));
        let r = est.region_estimates(&shots);
        assert_eq!(r[empirical12::CENTER_ABOVE_BREAK.0 as usize], 9.0 / 31.0);
        assert_eq!(r[empirical12::LEFT_CORNER_THREE.0 as usize], 5.0 / 11.0);
        assert_eq!(r[empirical12::PAINT.0 as usize], 0.2);
    }

    #[test]
    fn empirical_cells_inherit_region_values() {
        let g = CourtGrid::new();
        let est = empirical(&g);
        let pid = PlayerId::from("p");
        let shots = samples_in(&g, Point::new(25.5, 30.5), 8, 26);
        let input = FgpInput { player: &pid, shots: &shots, league: &[] };
        let point = est.point_estimate(&input).unwrap();
        for c in g.cells() {
            let expected = if est.partition.classify(c) == empirical12::CENTER_ABOVE_BREAK {
                9.0 / 31.0
            } else {
                0.2
            };
            assert_eq!(point[c.0], expected);
        }
    }

    #[test]
    fn posterior_draws_are_interior_and_reproducible() {
        let g = CourtGrid::new();
        let est = empirical(&g);
        let pid = PlayerId::from("p");
        let shots = samples_in(&g, Point::new(25.5, 6.5), 30, 40);
        let input = FgpInput { player: &pid, shots: &shots, league: &[] };
        let a = est.posterior(&input, 200, 11).unwrap();
        let b = est.posterior(&input, 200, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_draws(), 200);
        for s in 0..200 {
            assert!(a.draw(s).iter().all(|v| *v > 0.0 && *v < 1.0));
        }
        // Beta(31, 14) has mean 31/45; Monte-Carlo sd of the mean is ~0.005
        let rim = a.mean()[g.hoop_cell().0];
        assert!((rim - 31.0 / 45.0).abs() < 0.03, "{rim}");
    }

    #[test]
    fn invalid_pseudo_counts_are_rejected() {
        let g = CourtGrid::new();
        assert!(EmpiricalBeta::new(RegionPartition::broad3(&g), 1.0, 1.0).is_err());
        assert!(EmpiricalBeta::new(RegionPartition::broad3(&g), -1.0, 5.0).is_err());
        assert!(ShrunkBeta::new(RegionPartition::broad3(&g), 0.0).is_err());
    }

    #[test]
    fn shrunk_backend_reference_values() {
        let g = CourtGrid::new();
        let part = RegionPartition::broad3(&g);
        let mid = Point::new(25.5, 20.5);
        let league = samples_in(&g, mid, 36, 100);
        let pid = PlayerId::from("p");
        let cell = g.cell_of(mid).unwrap();

        let est = ShrunkBeta::new(part.clone(), 10.0).unwrap();
        let none = FgpInput { player: &pid, shots: &[], league: &league };
        assert!((est.point_estimate(&none).unwrap()[cell.0] - 0.36).abs() < 1e-12);

        let league30 = samples_in(&g, mid, 30, 100);
        let mine = samples_in(&g, mid, 10, 20);
        let input = FgpInput { player: &pid, shots: &mine, league: &league30 };
        let got = est.point_estimate(&input).unwrap()[cell.0];
        assert!((got - 13.0 / 30.0).abs() < 1e-12, "{got}");

        let tiny = ShrunkBeta::new(part, 1e-9).unwrap();
        let got = tiny.point_estimate(&input).unwrap()[cell.0];
        assert!((got - 0.5).abs() < 1e-9);
    }

    #[test]
    fn shrunk_falls_back_to_global_league_rate() {
        let g = CourtGrid::new();
        let est = ShrunkBeta::new(RegionPartition::broad3(&g), 10.0).unwrap();
        let league = samples_in(&g, Point::new(25.5, 20.5), 40, 100);
        let rates = est.league_rates(&league);
        assert_eq!(rates, vec![0.4, 0.4, 0.4]);
    }

    #[test]
    fn registry_creates_builtins_by_name() {
        let g = CourtGrid::new();
        let reg = EstimatorRegistry::with_builtins();
        assert_eq!(reg.names(), vec!["empirical", "external", "shrunk"]);
        let params = BackendParams::default();
        assert_eq!(reg.create("empirical", &params, &g).unwrap().name(), "empirical");
        assert_eq!(reg.create("shrunk", &params, &g).unwrap().name(), "shrunk");
        assert!(matches!(reg.create("external", &params, &g), Err(Error::Config(_))));
        assert!(matches!(reg.create("gp", &params, &g), Err(Error::UnknownStrategy { .. })));
    }

    #[test]
    fn external_backend_serves_loaded_surfaces() {
        let dir = tempfile::tempdir().unwrap();
        let pid = PlayerId::from("p7");
        let post = FgPctPosterior::degenerate(pid.clone(), "truth", &vec![0.45; 2350], 1).unwrap();
        post.mean_file().write(&dir.path().join("fgp_mean_p7.json")).unwrap();
        let ext = ExternalSurfaces::load_dir(dir.path()).unwrap();
        let input = FgpInput { player: &pid, shots: &[], league: &[] };
        let p = ext.posterior(&input, 4, 0).unwrap();
        assert_eq!(p.num_draws(), 4);
        assert_eq!(p.mean()[100], 0.45);
        let other = PlayerId::from("nobody");
        let missing = FgpInput { player: &other, shots: &[], league: &[] };
        assert!(ext.point_estimate(&missing).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn adding_a_make_never_lowers_the_estimate(makes in 0usize..40, misses in 0usize..40, kappa in 0.1f64..50.0) {
                let g = CourtGrid::new();
                let p = Point::new(25.5, 20.5);
                let cell = g.cell_of(p).unwrap();
                let pid = PlayerId::from("p");
                let league = samples_in(&g, p, 33, 90);
                let before = samples_in(&g, p, makes, makes + misses);
                let after = samples_in(&g, p, makes + 1, makes + misses + 1);

                let emp = empirical(&g);
                let b = emp.point_estimate(&FgpInput { player: &pid, shots: &before, league: &league }).unwrap()[cell.0];
                let a = emp.point_estimate(&FgpInput { player: &pid, shots: &after, league: &league }).unwrap()[cell.0];
                prop_assert!(a >= b);

                let shr = ShrunkBeta::new(RegionPartition::broad3(&g), kappa).unwrap();
                let b = shr.point_estimate(&FgpInput { player: &pid, shots: &before, league: &league }).unwrap()[cell.0];
                let a = shr.point_estimate(&FgpInput { player: &pid, shots: &after, league: &league }).unwrap()[cell.0];
                prop_assert!(a >= b);
            }
        }
    }
}
