use std::path::{Path, PathBuf};
use std::time::Duration;

use prodclarify_core::agent::AgentConfig;
use prodclarify_core::simbench::CatalogSource;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub port: u16,
    /// Directory of prebuilt web assets served at `/`.
    pub static_dir: Option<PathBuf>,
    pub session_ttl_secs: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { port: DEFAULT_PORT, static_dir: None, session_ttl_secs: DEFAULT_SESSION_TTL.as_secs() }
    }
}

/// Serve-mode configuration. Model credentials come from the environment,
/// never from this file.
///
/// ```toml
/// [catalog]
/// path = "items.jsonl"
///
/// [agent]
/// retriever = "fusion"
/// rerank = true
/// stats_source = "structured"
/// n = 3
/// k = 10
/// max_number = 100
/// seed = 7
///
/// [server]
/// port = 8080
/// static_dir = "webui/dist"
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub catalog: CatalogSource,
    pub agent: AgentConfig,
    pub server: ServerConfig,
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = config.catalog.path.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        if let Some(p) = config.server.static_dir.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        Ok(config)
    }

    pub fn session_ttl(&self) -> Duration {
        Duration::from_secs(self.server.session_ttl_secs)
    }
}
