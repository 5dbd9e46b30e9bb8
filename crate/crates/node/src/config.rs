use std::path::{Path, PathBuf};

use serde::Deserialize;

use redes_core::consensus::PeerAddr;
use redes_core::ledger::Difficulty;
use redes_core::son::CommandTemplates;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid advertise address: {0}")]
    Advertise(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Simulated,
    Command,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorConfig {
    pub backend: BackendKind,
    pub templates: CommandTemplates,
}

/// Node settings, read from a TOML file. Every field has a default.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeConfig {
    pub host: String,
    pub port: u16,
    /// Address peers use to reach this node; registering it is refused.
    /// Defaults to `http://127.0.0.1:<port>`.
    pub advertise: Option<String>,
    pub difficulty: Difficulty,
    /// When set, `/nodes/*` and `/blocks/*` require `Authorization: Bearer <token>`.
    pub auth_token: Option<String>,
    pub data_dir: PathBuf,
    pub fetch_timeout_ms: u64,
    pub actuator: ActuatorConfig,
}

impl Default for NodeConfig {
    fn default() -> Self {
        NodeConfig {
            host: "0.0.0.0".into(),
            port: 5000,
            advertise: None,
            difficulty: Difficulty::default(),
            auth_token: None,
            data_dir: PathBuf::from("redes-data"),
            fetch_timeout_ms: 2000,
            actuator: ActuatorConfig::default(),
        }
    }
}

impl NodeConfig {
    pub fn load(path: &Path) -> Result<NodeConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let config: NodeConfig =
            toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })?;
        config.own_address()?;
        Ok(config)
    }

    pub fn own_address(&self) -> Result<PeerAddr, ConfigError> {
        let raw = self.advertise.clone().unwrap_or_else(|| format!("http://127.0.0.1:{}", self.port));
        PeerAddr::parse(&raw).map_err(|e| ConfigError::Advertise(e.to_string()))
    }
}
