use std::fs;
use std::path::{Path, PathBuf};

use super::config::{require_path, RunConfig};
use crate::error::{Error, Result};
use crate::io::{write_atomic, GridFile};
use crate::render::render_svg;
use crate::synth::{generate_season, SynthConfig, SynthSeason};

/// Finds grid files under a directory, in sorted order. JSON documents that
/// are not single-surface grids (totals, draw matrices, results) are skipped.
fn grid_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            grid_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") && looks_like_grid(&path)? {
            out.push(path);
        }
    }
    Ok(())
}

fn looks_like_grid(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let Ok(serde_json::Value::Object(map)) = serde_json::from_str::<serde_json::Value>(&text) else {
        return Ok(false);
    };
    let single = map.get("kind").and_then(|k| k.as_str()).is_some_and(|k| !k.ends_with("_draws"));
    Ok(single && map.contains_key("values") && map.contains_key("width"))
}

/// Renders grid files to SVG. Explicit files must be valid grids; directories
/// are searched recursively and their layout is mirrored under `out/svg`.
pub fn cmd_render(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if inputs.is_empty() {
        return Err(Error::Config("render needs at least one grid file or directory".into()));
    }
    let out = cfg.out_dir().join("svg");
    let mut written = Vec::new();
    for input in inputs {
        let input = require_path(Some(input), "grid input")?;
        let jobs: Vec<(PathBuf, PathBuf)> = if input.is_dir() {
            let mut files = Vec::new();
            grid_files(input, &mut files)?;
            files
                .into_iter()
                .map(|f| {
                    let rel = f.strip_prefix(input).expect("found under input").with_extension("svg");
                    (f, out.join(rel))
                })
                .collect()
        } else {
            let name = input.with_extension("svg");
            let name = name.file_name().expect("file input has a name");
            vec![(input.to_path_buf(), out.join(name))]
        };
        for (src, dst) in jobs {
            let svg = render_svg(&GridFile::read(&src)?)?;
            write_atomic(&dst, svg.as_bytes())?;
            written.push(dst);
        }
    }
    Ok(written)
}

/// Generates a synthetic season in ingest-ready form. Uses the `[synth]`
/// table of the run config, or a small built-in league when absent.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthSeason> {
    let seed = cfg.require_seed()?;
    let mut synth = cfg.synth.clone().unwrap_or_else(|| SynthConfig::example(seed));
    synth.seed = seed;
    let season = generate_season(&synth)?;
    let out = cfg.out_dir();
    season.write(&out)?;
    write_atomic(&out.join("synth_config.toml"), synth.to_toml()?.as_bytes())?;
    Ok(season)
}
