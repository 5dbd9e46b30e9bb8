#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use redes_core::ledger::Difficulty;
use redes_node::wire::NewTransactionRequest;
use redes_node::{Node, NodeClient, NodeConfig};
use tokio::sync::oneshot;

pub struct Running {
    pub url: String,
    pub node: Arc<Node>,
    pub client: NodeClient,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl Running {
    pub async fn stop(mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        (&mut self.task).await.unwrap().unwrap();
    }
}

pub fn config(dir: &Path, token: Option<&str>) -> NodeConfig {
    NodeConfig {
        host: "127.0.0.1".into(),
        port: 0,
        difficulty: Difficulty::new(2).unwrap(),
        auth_token: token.map(str::to_string),
        data_dir: dir.to_path_buf(),
        fetch_timeout_ms: 1000,
        ..Default::default()
    }
}

/// Starts a node on an ephemeral port with its data under `dir`.
pub async fn start(dir: &Path, token: Option<&str>) -> Running {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let mut config = config(dir, token);
    config.advertise = Some(url.clone());
    let node = Arc::new(Node::open(&config).unwrap());
    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(redes_node::serve(listener, node.clone(), async {
        let _ = stopped.await;
    }));
    let client = NodeClient::new(&url, token.map(str::to_string));
    Running { url, node, client, stop: Some(stop), task }
}

pub fn tx(mac: &str, action: &str) -> NewTransactionRequest {
    NewTransactionRequest {
        sender: Some("node-a".into()),
        recipient: Some("ap-1".into()),
        mac: Some(mac.into()),
        action: Some(action.into()),
    }
}
