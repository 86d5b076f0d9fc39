use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use courtalloc::pipeline::{self, RunConfig};
use courtalloc::synth::SynthConfig;
use courtalloc::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_WARNINGS: u8 = 3;

/// Lineup shot-allocation analysis: ingestion, surfaces, metrics, inference.
#[derive(Debug, Parser)]
#[command(name = "courtalloc", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; required by every stochastic command
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rebuild lineup stints and join shots to lineups.
    Ingest {
        #[arg(long)]
        shots: Option<PathBuf>,
        #[arg(long)]
        pbp: Option<PathBuf>,
        #[arg(long)]
        games: Option<PathBuf>,
    },
    /// Write FG% and FGA surfaces for the selected lineups.
    Surfaces {
        #[command(flatten)]
        surfaces: SurfaceArgs,
        /// Also write full FG% draw matrices.
        #[arg(long)]
        write_draws: bool,
    },
    /// Compute rank, LPL and PLC surfaces for the selected lineups.
    Metrics {
        #[command(flatten)]
        surfaces: SurfaceArgs,
    },
    /// Permutation test of allocative optimality.
    Permtest {
        #[command(flatten)]
        surfaces: SurfaceArgs,
        /// Number of permutation variates.
        #[arg(short = 'S', long)]
        variates: Option<usize>,
    },
    /// Bayesian regression of team scores on total points lost.
    Regress {
        #[command(flatten)]
        surfaces: SurfaceArgs,
        /// Score observations CSV; otherwise computed from --data.
        #[arg(long)]
        observations: Option<PathBuf>,
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
    },
    /// Render grid JSON files (or directories of them) to SVG.
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Generate a synthetic season with known truth.
    Synth {
        /// Standalone synthetic-league TOML (instead of the `[synth]` table).
        #[arg(long)]
        synth_config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    /// Output directory of `ingest`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// FG% backend: empirical, shrunk or external.
    #[arg(long)]
    backend: Option<String>,
    /// Grid files for the external backend.
    #[arg(long)]
    fgp_dir: Option<PathBuf>,
    /// Region partition: broad3 or empirical12.
    #[arg(long)]
    partition: Option<String>,
    /// Posterior draws per player.
    #[arg(long)]
    draws: Option<usize>,
    /// FGA smoother: gaussian or none.
    #[arg(long)]
    smoother: Option<String>,
    /// Gaussian kernel bandwidth in feet.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Lineup id `TEAM:p1-p2-p3-p4-p5`; repeatable. Default: most-played per team.
    #[arg(long = "lineup")]
    lineups: Vec<String>,
}

impl SurfaceArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.data, self.data);
        set(&mut cfg.fgp.fgp_dir, self.fgp_dir);
        if let Some(v) = self.backend {
            cfg.backend = v;
        }
        if let Some(v) = self.partition {
            cfg.fgp.partition = v;
        }
        if let Some(v) = self.draws {
            cfg.draws = v;
        }
        if let Some(v) = self.smoother {
            cfg.smoother = v;
        }
        if let Some(v) = self.bandwidth {
            cfg.bandwidth = v;
        }
        if !self.lineups.is_empty() {
            cfg.lineups = self.lineups;
        }
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.out, cli.out);
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }

    match cli.command {
        Command::Ingest { shots, pbp, games } => {
            set(&mut cfg.shots, shots);
            set(&mut cfg.pbp, pbp);
            set(&mut cfg.games, games);
            let d = pipeline::cmd_ingest(&cfg)?;
            println!("stints: {} over {} games; lineups: {}", d.stints, d.games_in_pbp, d.lineups);
            println!(
                "shots: {} input, {} assigned, {} unmatched, {} shooter not on court, {} off grid",
                d.shots.input_shots,
                d.shots.assigned_shots,
                d.shots.unmatched_shots,
                d.shots.shooter_not_on_court,
                d.shots.off_grid_shots
            );
            println!("flagged games: {}", d.flagged_games.len());
            for f in &d.flagged_games {
                println!("  {} period {}: {}", f.game_id, f.period, f.reason);
            }
        }
        Command::Surfaces { surfaces, write_draws } => {
            surfaces.apply(&mut cfg);
            cfg.write_draws |= write_draws;
            for key in pipeline::cmd_surfaces(&cfg)? {
                println!("surfaces written for {key}");
            }
        }
        Command::Metrics { surfaces } => {
            surfaces.apply(&mut cfg);
            for t in pipeline::cmd_metrics(&cfg)? {
                println!("{}\ttotal LPL per 36 = {:.4}", t.lineup, t.total_lpl);
            }
        }
        Command::Permtest { surfaces, variates } => {
            surfaces.apply(&mut cfg);
            if let Some(s) = variates {
                cfg.variates = s;
            }
            for r in pipeline::cmd_permtest(&cfg)? {
                println!("{}\tS = {}\tp = {:.3}", r.lineup, r.s, r.p_hat);
            }
        }
        Command::Regress { surfaces, observations, chains, iterations, warmup } => {
            surfaces.apply(&mut cfg);
            set(&mut cfg.observations, observations);
            if let Some(v) = chains {
                cfg.mcmc.chains = v;
            }
            if let Some(v) = iterations {
                cfg.mcmc.iterations = v;
            }
            if let Some(v) = warmup {
                cfg.mcmc.warmup = v;
            }
            let r = pipeline::cmd_regress(&cfg)?;
            println!(
                "theta: mean {:.4}, 95% HPD [{:.4}, {:.4}] ({} observations)",
                r.theta.mean, r.theta.hpd_low, r.theta.hpd_high, r.observations
            );
            for t in &r.points_lost {
                println!("{}\tpoints lost per game {:.3}", t.team, t.mean);
            }
            if !r.converged {
                eprintln!("warning: sampler did not converge (max rhat {:.3})", r.max_rhat);
                return Ok(EXIT_WARNINGS);
            }
        }
        Command::Render { inputs } => {
            let written = pipeline::cmd_render(&cfg, &inputs)?;
            println!("rendered {} SVG files", written.len());
        }
        Command::Synth { synth_config } => {
            if let Some(path) = synth_config {
                cfg.synth = Some(SynthConfig::load(&path)?);
            }
            let season = pipeline::cmd_synth(&cfg)?;
            println!(
                "synthetic season: {} games, {} shots, {} lineups",
                season.games.len(),
                season.shots.len(),
                season.lineups.len()
            );
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
