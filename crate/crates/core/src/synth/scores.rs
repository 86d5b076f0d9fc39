use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{GameId, TeamId};
use crate::inference::ScoreObservation;
use crate::rng::task_rng;

/// Direct simulation of the score model, without going through shots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreSimConfig {
    pub seed: u64,
    pub teams: usize,
    /// Each round pairs every team once and plays the pair home and away.
    pub rounds: usize,
    pub mu: f64,
    pub gamma: f64,
    pub theta: f64,
    pub sigma: f64,
    pub team_sd: f64,
    /// TGLPL covariate ~ Gamma(shape, scale): positive and right-skewed.
    pub tglpl_shape: f64,
    pub tglpl_scale: f64,
}

impl Default for ScoreSimConfig {
    fn default() -> Self {
        ScoreSimConfig {
            seed: 0,
            teams: 30,
            rounds: 41,
            mu: 100.0,
            gamma: 2.0,
            theta: -0.62,
            sigma: 10.0,
            team_sd: 4.0,
            tglpl_shape: 4.0,
            tglpl_scale: 0.75,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedScores {
    pub observations: Vec<ScoreObservation>,
    pub offense: Vec<f64>,
    pub defense: Vec<f64>,
    pub teams: Vec<TeamId>,
}

/// Every team plays `2 * rounds` games: 30 teams and 41 rounds give the
/// familiar 82-game schedule.
pub fn simulate_score_observations(cfg: &ScoreSimConfig) -> Result<SimulatedScores> {
    if cfg.teams < 2 || !cfg.teams.is_multiple_of(2) {
        return Err(Error::Config(format!("need an even number of teams >= 2, got {}", cfg.teams)));
    }
    if !(cfg.sigma > 0.0 && cfg.tglpl_shape > 0.0 && cfg.tglpl_scale > 0.0 && cfg.team_sd >= 0.0) {
        return Err(Error::Config("sigma, tglpl_shape and tglpl_scale must be positive".into()));
    }
    let mut rng = task_rng(cfg.seed, "score-sim");
    let width = cfg.teams.to_string().len();
    let teams: Vec<TeamId> = (0..cfg.teams).map(|t| TeamId::from(format!("T{:0width$}", t + 1).as_str())).collect();
    let strength = Normal::new(0.0, cfg.team_sd).map_err(|e| Error::Config(e.to_string()))?;
    let centered = |rng: &mut _| -> Vec<f64> {
        let mut v: Vec<f64> = (0..cfg.teams).map(|_| strength.sample(rng)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        v
    };
    let offense = centered(&mut rng);
    let defense = centered(&mut rng);
    let noise = Normal::new(0.0, cfg.sigma).map_err(|e| Error::Config(e.to_string()))?;
    let covariate = Gamma::new(cfg.tglpl_shape, cfg.tglpl_scale).map_err(|e| Error::Config(e.to_string()))?;

    let mut observations = Vec::with_capacity(cfg.teams * cfg.rounds * 2);
    let mut order: Vec<usize> = (0..cfg.teams).collect();
    let mut game = 0usize;
    for _ in 0..cfg.rounds {
        order.shuffle(&mut rng);
        for pair in order.chunks_exact(2) {
            for (home, away) in [(pair[0], pair[1]), (pair[1], pair[0])] {
                game += 1;
                let id = GameId::from(format!("S{game:05}").as_str());
                for (a, b, is_home) in [(home, away, true), (away, home, false)] {
                    let tglpl = covariate.sample(&mut rng);
                    let mean = cfg.mu
                        + offense[a]
                        + defense[b]
                        + if is_home { cfg.gamma } else { 0.0 }
                        + cfg.theta * tglpl;
                    observations.push(ScoreObservation {
                        game_id: id.clone(),
                        team: teams[a].clone(),
                        opponent: teams[b].clone(),
                        home: is_home,
                        score: (mean + noise.sample(&mut rng)).max(0.0),
                        tglpl,
                    });
                }
            }
        }
    }
    Ok(SimulatedScores {
        observations,
        offense,
        defense,
        teams,
    })
}
