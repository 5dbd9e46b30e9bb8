//! HTTP node for the redes ledger: configuration, runtime state, the JSON
//! API and a client for it.

pub mod api;
pub mod client;
pub mod config;
pub mod service;
pub mod wire;

use std::future::Future;
use std::sync::Arc;

pub use client::{ClientError, NodeClient};
pub use config::NodeConfig;
pub use service::{BootError, Node};

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    node: Arc<Node>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, api::router(node)).with_graceful_shutdown(shutdown).await
}
