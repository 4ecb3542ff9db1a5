use std::path::{Path, PathBuf};

use serde::Deserialize;

const DEFAULT_CONFIG: &str = "prophier.toml";

/// Settings read from a config file. Flags and environment variables take
/// precedence over these.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub rules: Option<PathBuf>,
    pub parser_url: Option<String>,
    pub format: Option<String>,
    pub workers: Option<usize>,
    pub threshold: Option<f64>,
    pub grouping: Option<PathBuf>,
}

impl Config {
    /// Reads `path`, or `prophier.toml` if it exists, or nothing.
    pub fn load(path: Option<&Path>) -> Result<Config, String> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None if Path::new(DEFAULT_CONFIG).is_file() => PathBuf::from(DEFAULT_CONFIG),
            None => return Ok(Config::default()),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("reading {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
