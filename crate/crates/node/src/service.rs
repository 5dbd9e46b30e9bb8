//! Node runtime: state behind one lock, forge and resolve flows, boot.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use tokio::sync::Mutex;

use redes_core::consensus::{accept_block, resolve_conflicts, PeerAddr, PeerRegistry, ResolutionReport};
use redes_core::ledger::{forge_on_tip, Block, Chain, Difficulty, ForgeError, Timestamp, Transaction};
use redes_core::son::{ActuatorBackend, CommandBackend, EffectReport, ShellRunner, SimulatedFirewall, SonActuator};
use redes_core::store::{ChainLog, StoreError};

use crate::config::{BackendKind, ConfigError, NodeConfig};
use crate::wire::ChainResponse;

pub type DynBackend = Box<dyn ActuatorBackend + Send>;

const NODE_ID_FILE: &str = "node_id";
const CHAIN_LOG_FILE: &str = "chain.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum BootError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("data directory {path}: {source}")]
    DataDir { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl BootError {
    /// 2 when the persisted chain cannot be trusted, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BootError::Store(StoreError::Unrecoverable { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ForgeFailure {
    #[error(transparent)]
    Empty(#[from] ForgeError),
    #[error("chain tip moved twice while mining, retry later")]
    TipMoved,
    #[error("persisting block: {0}")]
    Persist(std::io::Error),
}

/// Everything a request may change. Held behind a single async mutex, so
/// handlers are serialized at the points where they touch state.
pub struct NodeState {
    pub chain: Chain,
    pub pending: Vec<Transaction>,
    pub registry: PeerRegistry,
    pub son: SonActuator<DynBackend>,
    log: ChainLog,
}

pub struct Node {
    node_id: String,
    difficulty: Difficulty,
    auth_token: Option<String>,
    http: reqwest::Client,
    state: Mutex<NodeState>,
}

fn log_effects(effects: &EffectReport) {
    for err in &effects.failures {
        tracing::warn!(%err, "actuator failed, will retry on next chain change");
    }
}

fn load_node_id(data_dir: &std::path::Path) -> std::io::Result<String> {
    let path = data_dir.join(NODE_ID_FILE);
    match std::fs::read_to_string(&path) {
        Ok(id) if !id.trim().is_empty() => Ok(id.trim().to_string()),
        Ok(_) => write_node_id(&path),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => write_node_id(&path),
        Err(e) => Err(e),
    }
}

fn write_node_id(path: &std::path::Path) -> std::io::Result<String> {
    let id = uuid::Uuid::new_v4().to_string();
    std::fs::write(path, format!("{id}\n"))?;
    Ok(id)
}

impl Node {
    /// Opens the data directory, restores the chain log and replays it into
    /// the actuator backend.
    pub fn open(config: &NodeConfig) -> Result<Node, BootError> {
        let backend: DynBackend = match config.actuator.backend {
            BackendKind::Simulated => Box::new(SimulatedFirewall::new()),
            BackendKind::Command => Box::new(CommandBackend::new(config.actuator.templates.clone(), ShellRunner)),
        };
        Node::open_with_backend(config, backend)
    }

    pub fn open_with_backend(config: &NodeConfig, backend: DynBackend) -> Result<Node, BootError> {
        let own = config.own_address()?;
        let data_err = |source| BootError::DataDir { path: config.data_dir.clone(), source };
        std::fs::create_dir_all(&config.data_dir).map_err(data_err)?;
        let node_id = load_node_id(&config.data_dir).map_err(data_err)?;

        let (log, restored) = ChainLog::open(config.data_dir.join(CHAIN_LOG_FILE), config.difficulty)?;
        if restored.dropped_lines > 0 || restored.dropped_bytes > 0 {
            tracing::warn!(
                lines = restored.dropped_lines,
                bytes = restored.dropped_bytes,
                "chain log had a corrupt tail, truncated"
            );
        }
        let mut son = SonActuator::new(backend);
        log_effects(&son.replay_chain(restored.chain.blocks()));

        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.fetch_timeout_ms))
            .build()
            .expect("http client with default settings");

        Ok(Node {
            node_id,
            difficulty: config.difficulty,
            auth_token: config.auth_token.clone(),
            http,
            state: Mutex::new(NodeState {
                chain: restored.chain,
                pending: Vec::new(),
                registry: PeerRegistry::new(Some(own)),
                son,
                log,
            }),
        })
    }

    pub fn node_id(&self) -> &str {
        &self.node_id
    }

    pub fn difficulty(&self) -> Difficulty {
        self.difficulty
    }

    pub fn auth_token(&self) -> Option<&str> {
        self.auth_token.as_deref()
    }

    pub async fn lock(&self) -> tokio::sync::MutexGuard<'_, NodeState> {
        self.state.lock().await
    }

    /// Queues a transaction and returns the index it would land in.
    pub async fn submit(&self, tx: Transaction) -> u64 {
        let mut state = self.state.lock().await;
        state.pending.push(tx);
        state.chain.tip().index + 1
    }

    /// Mines the pending pool on top of the current tip without holding the
    /// lock. If the tip moved meanwhile, mining is retried once.
    pub async fn forge(self: &Arc<Self>) -> Result<(Block, u64), ForgeFailure> {
        for _ in 0..2 {
            let (tip, pending) = {
                let state = self.state.lock().await;
                if state.pending.is_empty() {
                    return Err(ForgeError::EmptyPending.into());
                }
                (state.chain.tip().clone(), state.pending.clone())
            };
            let difficulty = self.difficulty;
            let tip_for_mining = tip.clone();
            let forged = tokio::task::spawn_blocking(move || {
                forge_on_tip(&tip_for_mining, &pending, difficulty, Timestamp::now())
            })
            .await
            .expect("mining task panicked")?;

            let mut guard = self.state.lock().await;
            let state = &mut *guard;
            if *state.chain.tip() != tip {
                tracing::info!("tip moved while mining, retrying");
                continue;
            }
            // Same tip means no forge or adoption ran in between, so the
            // pool still starts with the transactions we mined.
            let n = forged.block.transactions.len();
            let event = accept_block(&mut state.chain, forged.block.clone(), difficulty)
                .expect("block mined on the current tip is acceptable");
            state.pending.drain(..n);
            let persisted = state.log.append(&forged.block);
            log_effects(&state.son.handle(&event));
            persisted.map_err(ForgeFailure::Persist)?;
            return Ok((forged.block, forged.attempts));
        }
        Err(ForgeFailure::TipMoved)
    }

    async fn fetch_chain(&self, peer: &PeerAddr) -> Option<Vec<Block>> {
        let url = format!("{}/chain", peer.as_str());
        let response = match self.http.get(&url).send().await {
            Ok(r) if r.status().is_success() => r,
            Ok(r) => {
                tracing::debug!(%peer, status = %r.status(), "peer refused chain request");
                return None;
            }
            Err(e) => {
                tracing::debug!(%peer, %e, "peer unreachable");
                return None;
            }
        };
        match response.json::<ChainResponse>().await {
            Ok(body) => Some(body.chain),
            Err(e) => {
                tracing::debug!(%peer, %e, "peer sent an unreadable chain");
                None
            }
        }
    }

    /// Fetches every peer's chain concurrently, picks the longest valid one
    /// off the lock, then installs it if it still beats the local chain.
    pub async fn resolve(&self) -> std::io::Result<(ResolutionReport, usize)> {
        let (local, registry) = {
            let state = self.state.lock().await;
            (state.chain.clone(), state.registry.clone())
        };
        let fetched = futures::future::join_all(
            registry.iter().map(|peer| async move { (peer.clone(), self.fetch_chain(peer).await) }),
        )
        .await;
        let chains: HashMap<PeerAddr, Vec<Block>> =
            fetched.into_iter().filter_map(|(peer, chain)| Some((peer, chain?))).collect();

        let difficulty = self.difficulty;
        let resolution =
            tokio::task::spawn_blocking(move || resolve_conflicts(&local, &registry, &chains, difficulty))
                .await
                .expect("resolve task panicked");

        let mut report = resolution.report.clone();
        let mut guard = self.state.lock().await;
        let state = &mut *guard;
        let event = resolution.apply(&mut state.chain);
        report.replaced = event.is_some();
        report.new_length = state.chain.len();
        let length = state.chain.len();
        if let Some(event) = event {
            tracing::info!(from = ?report.adopted_from, length, "adopted longer chain");
            let persisted = state.log.rewrite(&state.chain);
            log_effects(&state.son.handle(&event));
            persisted?;
        }
        Ok((report, length))
    }
}
