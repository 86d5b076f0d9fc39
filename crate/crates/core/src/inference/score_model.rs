//! Team score regression:
//!
//! `score_abg ~ N(mu + alpha_a + beta_b + gamma * home + theta * tglpl, sigma^2)`
//!
//! with `mu ~ N(100, 10^2)`; `alpha`, `beta`, `gamma`, `theta ~ N(0, 10^2)`;
//! `sigma ~ Gamma(shape 2, rate 0.2)`, and sum-to-zero constraints on the team
//! effects.
//!
//! The constraints are handled by writing `alpha = Q a` with `Q` an
//! orthonormal basis of the sum-zero subspace (Helmert contrasts). With
//! `a ~ N(0, 100 I)` this is exactly the iid normal prior conditioned on
//! `sum(alpha) = 0`. All regression coefficients are then drawn jointly from
//! their Gaussian full conditional; `X'X` is diagonalized once so each draw
//! costs O(p^2). `sigma` gets random-walk Metropolis steps on `log sigma`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{GameId, TeamId};
use crate::ingest::csvutil::{fmt_f64, Columns};
use crate::rng::indexed_rng;

pub(crate) const OBS_COLUMNS: [&str; 6] = ["game_id", "team_id", "opponent_id", "home", "score", "tglpl"];

const PRIOR_VAR: f64 = 100.0;
const MU_PRIOR_MEAN: f64 = 100.0;
const SIGMA_SHAPE: f64 = 2.0;
const SIGMA_RATE: f64 = 0.2;
const SIGMA_STEPS: usize = 5;
const TUNE_WINDOW: usize = 50;
pub const RHAT_THRESHOLD: f64 = 1.05;

/// One team's score in one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreObservation {
    pub game_id: GameId,
    pub team: TeamId,
    pub opponent: TeamId,
    pub home: bool,
    pub score: f64,
    pub tglpl: f64,
}

pub fn parse_observations<R: Read>(reader: R, label: &str) -> Result<Vec<ScoreObservation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(label, &headers, &OBS_COLUMNS)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let home = match cols.str(&record, "home") {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(cols.error(&record, "home", format!("expected 0 or 1, got `{other}`"))),
        };
        let score: f64 = cols.parse(&record, "score")?;
        if !(score >= 0.0 && score.is_finite()) {
            return Err(cols.error(&record, "score", format!("score must be non-negative, got {score}")));
        }
        let tglpl: f64 = cols.parse(&record, "tglpl")?;
        if !tglpl.is_finite() {
            return Err(cols.error(&record, "tglpl", "not finite"));
        }
        out.push(ScoreObservation {
            game_id: cols.required(&record, "game_id")?.into(),
            team: cols.required(&record, "team_id")?.into(),
            opponent: cols.required(&record, "opponent_id")?.into(),
            home,
            score,
            tglpl,
        });
    }
    Ok(out)
}

pub fn read_observations(path: &Path) -> Result<Vec<ScoreObservation>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_observations(file, &path.display().to_string())
}

pub fn write_observations<W: Write>(writer: W, obs: &[ScoreObservation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(OBS_COLUMNS)?;
    for o in obs {
        w.write_record([
            o.game_id.as_str(),
            o.team.as_str(),
            o.opponent.as_str(),
            if o.home { "1" } else { "0" },
            &fmt_f64(o.score),
            &fmt_f64(o.tglpl),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<observations>", e))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreModelConfig {
    pub chains: usize,
    pub iterations: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for ScoreModelConfig {
    fn default() -> Self {
        ScoreModelConfig {
            chains: 4,
            iterations: 2000,
            warmup: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub rhat: f64,
}

/// Post-warmup draws pooled chain by chain. `alpha[t]` and `beta[t]` follow
/// the order of `teams`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreModelPosterior {
    pub teams: Vec<TeamId>,
    pub chains: usize,
    pub draws_per_chain: usize,
    pub mu: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_acceptance: Vec<f64>,
    pub summaries: BTreeMap<String, ParamSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub draws: Vec<f64>,
    pub summary: ParamSummary,
}

/// On-disk form of a fitted posterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorFile {
    pub chains: usize,
    pub draws_per_chain: usize,
    pub converged: bool,
    pub max_rhat: f64,
    pub sigma_acceptance: Vec<f64>,
    pub teams: Vec<TeamId>,
    pub parameters: BTreeMap<String, ParamBlock>,
}

impl ScoreModelPosterior {
    /// Every scalar parameter with its pooled draws.
    pub fn parameters(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = vec![("mu".into(), &self.mu)];
        for (t, team) in self.teams.iter().enumerate() {
            out.push((format!("alpha[{team}]"), &self.alpha[t]));
        }
        for (t, team) in self.teams.iter().enumerate() {
            out.push((format!("beta[{team}]"), &self.beta[t]));
        }
        out.push(("gamma".into(), &self.gamma));
        out.push(("theta".into(), &self.theta));
        out.push(("sigma".into(), &self.sigma));
        out
    }

    pub fn summary(&self, name: &str) -> Option<&ParamSummary> {
        self.summaries.get(name)
    }

    pub fn theta_summary(&self) -> ParamSummary {
        self.summaries["theta"]
    }

    pub fn max_rhat(&self) -> f64 {
        self.summaries.values().map(|s| s.rhat).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every split-chain diagnostic at or below the threshold.
    pub fn converged(&self) -> bool {
        self.summaries.values().all(|s| s.rhat <= RHAT_THRESHOLD)
    }

    pub fn to_file(&self) -> PosteriorFile {
        let parameters = self
            .parameters()
            .into_iter()
            .map(|(name, draws)| {
                let summary = self.summaries[&name];
                (name, ParamBlock { draws: draws.to_vec(), summary })
            })
            .collect();
        PosteriorFile {
            chains: self.chains,
            draws_per_chain: self.draws_per_chain,
            converged: self.converged(),
            max_rhat: self.max_rhat(),
            sigma_acceptance: self.sigma_acceptance.clone(),
            teams: self.teams.clone(),
            parameters,
        }
    }
}

/// Orthonormal basis of `{x : sum(x) = 0}` as a `t x (t-1)` matrix.
pub fn sum_zero_basis(t: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(t, t.saturating_sub(1));
    for k in 1..t {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / norm;
        }
        q[(k, k - 1)] = -(k as f64) / norm;
    }
    q
}

struct Design {
    n: usize,
    teams: usize,
    q: DMatrix<f64>,
    vecs: DMatrix<f64>,
    eig: DVector<f64>,
    vt_xty: DVector<f64>,
    vt_prior: DVector<f64>,
    yty: f64,
}

impl Design {
    fn p(&self) -> usize {
        2 * self.teams + 1
    }

    fn new(obs: &[ScoreObservation], index: &BTreeMap<&TeamId, usize>) -> Design {
        let t = index.len();
        let p = 2 * t + 1;
        let q = sum_zero_basis(t);
        let mut xtx = DMatrix::<f64>::zeros(p, p);
        let mut xty = DVector::<f64>::zeros(p);
        let mut yty = 0.0;
        let mut row = vec![0.0; p];
        for o in obs {
            let (a, b) = (index[&o.team], index[&o.opponent]);
            row[0] = 1.0;
            for k in 0..t - 1 {
                row[1 + k] = q[(a, k)];
                row[t + k] = q[(b, k)];
            }
            row[2 * t - 1] = if o.home { 1.0 } else { 0.0 };
            row[2 * t] = o.tglpl;
            for i in 0..p {
                if row[i] == 0.0 {
                    continue;
                }
                xty[i] += row[i] * o.score;
                for j in 0..p {
                    xtx[(i, j)] += row[i] * row[j];
                }
            }
            yty += o.score * o.score;
        }
        let eigen = SymmetricEigen::new(xtx);
        let mut prior_mean = DVector::<f64>::zeros(p);
        prior_mean[0] = MU_PRIOR_MEAN;
        let vt_xty = eigen.eigenvectors.tr_mul(&xty);
        let vt_prior = eigen.eigenvectors.tr_mul(&prior_mean);
        Design {
            n: obs.len(),
            teams: t,
            q,
            eig: eigen.eigenvalues.map(|d| d.max(0.0)),
            vecs: eigen.eigenvectors,
            vt_xty,
            vt_prior,
            yty,
        }
    }
}

struct ChainDraws {
    // parameter-major: [mu, alpha.., beta.., gamma, theta, sigma]
    params: Vec<Vec<f64>>,
    acceptance: f64,
}

fn log_sigma_target(eta: f64, n: f64, rss: f64) -> f64 {
    // likelihood + Gamma(shape, rate) prior on sigma + Jacobian of sigma = e^eta
    -n * eta - 0.5 * rss * (-2.0 * eta).exp() + SIGMA_SHAPE * eta - SIGMA_RATE * eta.exp()
}

fn run_chain(design: &Design, cfg: &ScoreModelConfig, chain: usize) -> ChainDraws {
    let mut rng = indexed_rng(cfg.seed, "score-model/chain", chain as u64);
    let (p, t) = (design.p(), design.teams);
    let keep = cfg.iterations - cfg.warmup;
    let mut params = vec![Vec::with_capacity(keep); 2 * t + 4];
    let mut eta: f64 = rng.random_range(3.0f64..30.0).ln();
    let mut step = 0.5;
    let (mut window_acc, mut window_tries) = (0usize, 0usize);
    let (mut kept_acc, mut kept_tries) = (0usize, 0usize);
    let mut w = DVector::<f64>::zeros(p);
    let n = design.n as f64;

    for iter in 0..cfg.iterations {
        let inv_s2 = (-2.0 * eta).exp();
        for k in 0..p {
            let lam = design.eig[k] * inv_s2 + 1.0 / PRIOR_VAR;
            let r = design.vt_xty[k] * inv_s2 + design.vt_prior[k] / PRIOR_VAR;
            let z: f64 = rng.sample(StandardNormal);
            w[k] = r / lam + z / lam.sqrt();
        }
        let mut rss = design.yty - 2.0 * w.dot(&design.vt_xty);
        for k in 0..p {
            rss += design.eig[k] * w[k] * w[k];
        }
        let rss = rss.max(0.0);

        let mut current = log_sigma_target(eta, n, rss);
        for _ in 0..SIGMA_STEPS {
            let z: f64 = rng.sample(StandardNormal);
            let proposal = eta + step * z;
            let cand = log_sigma_target(proposal, n, rss);
            let u: f64 = rng.random();
            let accept = u.ln() < cand - current;
            if accept {
                eta = proposal;
                current = cand;
            }
            if iter < cfg.warmup {
                window_acc += usize::from(accept);
                window_tries += 1;
            } else {
                kept_acc += usize::from(accept);
                kept_tries += 1;
            }
        }
        if iter < cfg.warmup && (iter + 1) % TUNE_WINDOW == 0 {
            let rate = window_acc as f64 / window_tries as f64;
            if rate < 0.3 {
                step *= 0.8;
            } else if rate > 0.5 {
                step *= 1.25;
            }
            window_acc = 0;
            window_tries = 0;
        }
        if iter >= cfg.warmup {
            let b = &design.vecs * &w;
            params[0].push(b[0]);
            for team in 0..t {
                let (mut a, mut d) = (0.0, 0.0);
                for k in 0..t - 1 {
                    a += design.q[(team, k)] * b[1 + k];
                    d += design.q[(team, k)] * b[t + k];
                }
                params[1 + team].push(a);
                params[1 + t + team].push(d);
            }
            params[2 * t + 1].push(b[2 * t - 1]);
            params[2 * t + 2].push(b[2 * t]);
            params[2 * t + 3].push(eta.exp());
        }
    }
    ChainDraws {
        params,
        acceptance: if kept_tries > 0 { kept_acc as f64 / kept_tries as f64 } else { 0.0 },
    }
}

/// Split-chain potential scale reduction. Each chain is halved, and the
/// between/within variance ratio is computed over the halves.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    if n < 2 {
        return f64::NAN;
    }
    let mut halves: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        let c = &c[c.len() - 2 * n..];
        halves.push(&c[..n]);
        halves.push(&c[n..]);
    }
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = halves
        .iter()
        .zip(&means)
        .map(|(h, mean)| h.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    (var_plus / w).sqrt()
}

/// Shortest interval containing `ceil(mass * n)` of the draws.
pub fn hpd_interval(draws: &[f64], mass: f64) -> (f64, f64) {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = ((mass * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[k - 1]);
    for i in 1..=n - k {
        let (lo, hi) = (sorted[i], sorted[i + k - 1]);
        if hi - lo < best.1 - best.0 {
            best = (lo, hi);
        }
    }
    best
}

fn validate(obs: &[ScoreObservation], cfg: &ScoreModelConfig) -> Result<()> {
    if cfg.chains < 2 {
        return Err(Error::Config(format!("need at least 2 chains, got {}", cfg.chains)));
    }
    if cfg.warmup >= cfg.iterations || cfg.iterations - cfg.warmup < 4 {
        return Err(Error::Config(format!(
            "iterations ({}) must exceed warmup ({}) by at least 4",
            cfg.iterations, cfg.warmup
        )));
    }
    if obs.is_empty() {
        return Err(Error::validation("no score observations"));
    }
    for o in obs {
        if !(o.score >= 0.0 && o.score.is_finite()) || !o.tglpl.is_finite() {
            return Err(Error::validation(format!("game {} team {}: invalid score or tglpl", o.game_id, o.team)));
        }
        if o.team == o.opponent {
            return Err(Error::validation(format!("game {}: team {} plays itself", o.game_id, o.team)));
        }
    }
    let offense: BTreeSet<&TeamId> = obs.iter().map(|o| &o.team).collect();
    let defense: BTreeSet<&TeamId> = obs.iter().map(|o| &o.opponent).collect();
    if let Some(t) = offense.symmetric_difference(&defense).next() {
        return Err(Error::validation(format!("team {t} must appear both as offense and as defense")));
    }
    if offense.len() < 2 {
        return Err(Error::validation("need at least two teams"));
    }
    Ok(())
}

/// Runs `cfg.chains` independent chains in parallel and pools their
/// post-warmup draws. Convergence is reported through
/// [`ScoreModelPosterior::converged`]; callers decide how to surface it.
pub fn fit_score_model(obs: &[ScoreObservation], cfg: &ScoreModelConfig) -> Result<ScoreModelPosterior> {
    validate(obs, cfg)?;
    let teams: BTreeSet<&TeamId> = obs.iter().map(|o| &o.team).collect();
    let index: BTreeMap<&TeamId, usize> = teams.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let design = Design::new(obs, &index);
    let chains: Vec<ChainDraws> = (0..cfg.chains).into_par_iter().map(|c| run_chain(&design, cfg, c)).collect();

    let t = teams.len();
    let pooled = |k: usize| -> Vec<f64> { chains.iter().flat_map(|c| c.params[k].iter().copied()).collect() };
    let mut post = ScoreModelPosterior {
        teams: teams.iter().map(|t| (*t).clone()).collect(),
        chains: cfg.chains,
        draws_per_chain: cfg.iterations - cfg.warmup,
        mu: pooled(0),
        alpha: (0..t).map(|i| pooled(1 + i)).collect(),
        beta: (0..t).map(|i| pooled(1 + t + i)).collect(),
        gamma: pooled(2 * t + 1),
        theta: pooled(2 * t + 2),
        sigma: pooled(2 * t + 3),
        sigma_acceptance: chains.iter().map(|c| c.acceptance).collect(),
        summaries: BTreeMap::new(),
    };
    let names: Vec<String> = post.parameters().into_iter().map(|(n, _)| n).collect();
    for (k, name) in names.into_iter().enumerate() {
        let per_chain: Vec<&[f64]> = chains.iter().map(|c| c.params[k].as_slice()).collect();
        let all = pooled(k);
        let (hpd_low, hpd_high) = hpd_interval(&all, 0.95);
        post.summaries.insert(
            name,
            ParamSummary {
                mean: all.iter().sum::<f64>() / all.len() as f64,
                hpd_low,
                hpd_high,
                rhat: split_rhat(&per_chain),
            },
        );
    }
    Ok(post)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamPointsLost {
    pub team: TeamId,
    pub games: usize,
    pub mean: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
}

/// Linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Actual points lost per game, `-theta_hat * tglpl`, so that a negative
/// coefficient and positive TGLPL report a positive loss.
pub fn points_lost(theta_hat: f64, tglpl: f64) -> f64 {
    -theta_hat * tglpl
}

/// Per-team distribution of points lost over that team's games.
pub fn points_lost_summary(theta_hat: f64, per_game: &[(TeamId, f64)]) -> Vec<TeamPointsLost> {
    let mut by_team: BTreeMap<&TeamId, Vec<f64>> = BTreeMap::new();
    for (team, tglpl) in per_game {
        by_team.entry(team).or_default().push(points_lost(theta_hat, *tglpl));
    }
    by_team
        .into_iter()
        .map(|(team, mut v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.sort_by(f64::total_cmp);
            TeamPointsLost {
                team: team.clone(),
                games: v.len(),
                mean,
                q10: quantile(&v, 0.1),
                median: quantile(&v, 0.5),
                q90: quantile(&v, 0.9),
            }
        })
        .collect()
}
