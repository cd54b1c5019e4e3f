//! Service configuration file.

use std::path::{Path, PathBuf};

use semwiki_core::infer::Limits;
use semwiki_core::tptp::SelectionParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the configuration file.
pub const CONFIG_ENV: &str = "T2KU_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("E_CONFIG: cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("E_CONFIG: {path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub port: u16,
    pub lease_seconds: u64,
    pub global_timeout_seconds: u64,
    pub limits: Limits,
    pub selection: SelectionParams,
    pub data_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            port: 8080,
            lease_seconds: 30,
            global_timeout_seconds: 120,
            limits: Limits::default(),
            selection: SelectionParams::default(),
            data_dir: PathBuf::from("data"),
        }
    }
}

impl Config {
    pub fn lease_ms(&self) -> i64 {
        self.lease_seconds as i64 * 1000
    }

    pub fn global_timeout_ms(&self) -> i64 {
        self.global_timeout_seconds as i64 * 1000
    }

    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config: Config = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|message| ConfigError::Invalid {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(config)
    }

    /// Reads `explicit` if given, else the file named by `T2KU_CONFIG`,
    /// else returns the defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Config, ConfigError> {
        match explicit {
            Some(p) => Config::from_file(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Config::from_file(Path::new(&p)),
                _ => Ok(Config::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.lease_seconds == 0 || self.global_timeout_seconds == 0 {
            return Err("lease_seconds and global_timeout_seconds must be positive".into());
        }
        self.limits.validate().map_err(|e| e.to_string())?;
        self.selection.validate().map_err(|e| e.to_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"port": 9000, "limits": {"max_depth": 4, "step_budget": 10, "time_budget": 2, "term_depth": 1}}"#)
            .unwrap();
        let c = Config::from_file(&path).unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.lease_seconds, 30);
        assert_eq!(c.limits.max_depth, 4);
        assert_eq!(c.selection, SelectionParams::default());
    }

    #[test]
    fn bad_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"lease_seconds": 0}"#).unwrap();
        assert!(Config::from_file(&path).is_err());
        std::fs::write(&path, r#"{"port": "x"}"#).unwrap();
        assert!(Config::from_file(&path).is_err());
    }
}
