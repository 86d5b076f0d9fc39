use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{ScoreModelConfig, DEFAULT_VARIATES};
use crate::rng::derive_seed;
use crate::surfaces::BackendParams;
use crate::synth::SynthConfig;

/// Sampler settings for the score regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSettings {
    pub chains: usize,
    pub iterations: usize,
    pub warmup: usize,
}

impl Default for McmcSettings {
    fn default() -> Self {
        let d = ScoreModelConfig::default();
        Self { chains: d.chains, iterations: d.iterations, warmup: d.warmup }
    }
}

/// Everything a pipeline command needs. Loaded from TOML, then overridden by
/// command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub shots: Option<PathBuf>,
    pub pbp: Option<PathBuf>,
    pub games: Option<PathBuf>,
    /// Output directory of a previous `ingest` run.
    pub data: Option<PathBuf>,
    /// Ready-made score observations for `regress`.
    pub observations: Option<PathBuf>,
    pub backend: String,
    pub fgp: BackendParams,
    pub draws: usize,
    /// Also write full FG% draw matrices from `surfaces`.
    pub write_draws: bool,
    pub smoother: String,
    pub bandwidth: f64,
    /// Region partition for game-level points lost.
    pub glpl_partition: String,
    /// Explicit lineup ids (`TEAM:p1-p2-p3-p4-p5`); empty selects the
    /// most-played lineup of every team.
    pub lineups: Vec<String>,
    pub variates: usize,
    pub mcmc: McmcSettings,
    pub synth: Option<SynthConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: None,
            shots: None,
            pbp: None,
            games: None,
            data: None,
            observations: None,
            backend: "empirical".into(),
            fgp: BackendParams::default(),
            draws: 500,
            write_draws: false,
            smoother: "gaussian".into(),
            bandwidth: 3.0,
            glpl_partition: "broad3".into(),
            lineups: Vec::new(),
            variates: DEFAULT_VARIATES,
            mcmc: McmcSettings::default(),
            synth: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(base) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
                *path = base.join(&*path);
            }
        };
        for p in [
            &mut self.out,
            &mut self.shots,
            &mut self.pbp,
            &mut self.games,
            &mut self.data,
            &mut self.observations,
            &mut self.fgp.fgp_dir,
        ] {
            fix(p);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("this command is stochastic and needs a seed (--seed or `seed = ...`)".into()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn score_model_config(&self, seed: u64) -> ScoreModelConfig {
        ScoreModelConfig {
            chains: self.mcmc.chains,
            iterations: self.mcmc.iterations,
            warmup: self.mcmc.warmup,
            seed: derive_seed(seed, "regress"),
        }
    }
}

/// Returns the path if it names an existing file or directory.
pub(crate) fn require_path<'a>(path: Option<&'a PathBuf>, what: &str) -> Result<&'a Path> {
    let path = path.ok_or_else(|| Error::Config(format!("missing input: {what}")))?;
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} not found"))));
    }
    Ok(path)
}
