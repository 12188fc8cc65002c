//! Flat TOML run configuration. Every key mirrors a command-line flag with
//! dashes replaced by underscores; flags given on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub levels: Option<PathBuf>,
    pub paths: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub paths_model: Option<PathBuf>,
    pub level_model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub path_length: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub dropout_rate: Option<f64>,
    pub clip_norm: Option<f64>,
    pub batch_size: Option<usize>,
    pub hidden_size: Option<usize>,
    pub layers: Option<usize>,
    pub chunk_len: Option<usize>,
    pub format: Option<String>,
    pub host: Option<String>,
    pub port: Option<u16>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag value, else config value.
pub fn pick<T>(flag: Option<T>, config: Option<T>) -> Option<T> {
    flag.or(config)
}

/// Flag value, else config value, else an error naming the flag.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    match flag.or(config) {
        Some(v) => Ok(v),
        None => bail!("missing --{name} (flag or `{}` in the config file)", name.replace('-', "_")),
    }
}
