mod common;

use std::collections::BTreeSet;

use common::{start, tx};
use redes_core::ledger::{canonical_hash, valid_chain, Action, Block, Difficulty};
use redes_node::wire::NewTransactionRequest;
use redes_node::ClientError;

const GENESIS_HASH: &str = "d24dbd41f5d5bc4ac7ad0325b9926efa4e12969ff95d7db2e79492a9970bc4f0";

fn d2() -> Difficulty {
    Difficulty::new(2).unwrap()
}

fn status(err: ClientError) -> u16 {
    match err {
        ClientError::Api { status, .. } => status,
        other => panic!("expected an API error, got {other}"),
    }
}

async fn raw_post(url: &str, body: &str) -> u16 {
    reqwest::Client::new()
        .post(url)
        .header("content-type", "application/json")
        .body(body.to_string())
        .send()
        .await
        .unwrap()
        .status()
        .as_u16()
}

#[tokio::test]
async fn fresh_node_serves_genesis() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let chain = n.client.chain().await.unwrap();
    assert_eq!(chain.length, 1);
    assert_eq!(chain.chain[0].hash(), GENESIS_HASH);
    n.stop().await;
}

#[tokio::test]
async fn register_is_idempotent_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let peers = vec!["http://10.0.0.2:5000".to_string(), "http://10.0.0.3:5000".to_string()];
    let r = n.client.register(peers.clone()).await.unwrap();
    assert_eq!(r.total, 2);
    assert_eq!(r.registered, peers);
    assert_eq!(n.client.register(peers).await.unwrap().total, 2);
    // Same peer in another spelling normalizes onto the existing entry.
    assert_eq!(n.client.register(vec!["10.0.0.2:5000/".into()]).await.unwrap().total, 2);

    assert_eq!(status(n.client.register(vec![]).await.unwrap_err()), 400);
    assert_eq!(status(n.client.register(vec!["ftp://10.0.0.9".into()]).await.unwrap_err()), 400);
    assert_eq!(status(n.client.register(vec![n.url.clone()]).await.unwrap_err()), 400);
    // A bad entry rejects the whole list.
    let mixed = vec!["http://10.0.0.4:5000".into(), "not a url at all".into()];
    assert_eq!(status(n.client.register(mixed).await.unwrap_err()), 400);
    assert_eq!(n.node.lock().await.registry.len(), 2);

    assert_eq!(raw_post(&format!("{}/nodes/register", n.url), "{\"nodes\": 5}").await, 400);
    assert_eq!(raw_post(&format!("{}/nodes/register", n.url), "{").await, 400);
    n.stop().await;
}

#[tokio::test]
async fn remove_reports_unknown_peers() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    n.client.register(vec!["http://10.0.0.2:5000".into(), "http://10.0.0.3:5000".into()]).await.unwrap();
    let r = n.client.remove(vec!["http://10.0.0.2:5000".into()]).await.unwrap();
    assert_eq!((r.removed.len(), r.total), (1, 1));
    let r = n.client.remove(vec!["http://10.0.0.99:5000".into()]).await.unwrap();
    assert_eq!(r.not_found, vec!["http://10.0.0.99:5000".to_string()]);
    assert_eq!(r.total, 1);
    assert_eq!(raw_post(&format!("{}/nodes/remove", n.url), "[]").await, 400);
    n.stop().await;
}

#[tokio::test]
async fn transactions_are_validated_and_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let r = n.client.submit(&tx("AA-BB-CC-DD-EE-01", "allow")).await.unwrap();
    assert_eq!(r.block_index_hint, 2);
    n.client.submit(&tx("aa:bb:cc:dd:ee:02", "denied")).await.unwrap();

    assert_eq!(status(n.client.submit(&tx("zz:zz:zz:zz:zz:zz", "allow")).await.unwrap_err()), 400);
    assert_eq!(status(n.client.submit(&tx("aa:bb:cc:dd:ee:03", "maybe")).await.unwrap_err()), 400);
    let missing = NewTransactionRequest { mac: None, ..tx("aa:bb:cc:dd:ee:04", "allow") };
    match n.client.submit(&missing).await.unwrap_err() {
        ClientError::Api { status, message } => {
            assert_eq!(status, 400);
            assert!(message.contains("mac"), "{message}");
        }
        other => panic!("{other}"),
    }

    let block = n.client.forge().await.unwrap().block;
    let stored: Vec<(String, Action)> =
        block.transactions.iter().map(|t| (t.mac.to_string(), t.action)).collect();
    assert_eq!(
        stored,
        vec![("aa:bb:cc:dd:ee:01".to_string(), Action::Allow), ("aa:bb:cc:dd:ee:02".to_string(), Action::Deny)]
    );
    n.stop().await;
}

#[tokio::test]
async fn forge_mines_links_and_drains() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    match n.client.forge().await.unwrap_err() {
        ClientError::Api { status, message } => {
            assert_eq!(status, 409);
            assert!(message.contains("EmptyPending"));
        }
        other => panic!("{other}"),
    }

    let prior_tip = n.client.chain().await.unwrap().chain.last().unwrap().hash();
    n.client.submit(&tx("02:00:00:00:00:01", "allow")).await.unwrap();
    let forged = n.client.forge().await.unwrap();
    assert_eq!(forged.block.index, 2);
    assert_eq!(forged.block.previous_hash, prior_tip);
    assert!(forged.attempts >= 1);
    assert!(n.node.lock().await.pending.is_empty());
    assert_eq!(status(n.client.forge().await.unwrap_err()), 409);

    let chain = n.client.chain().await.unwrap();
    assert_eq!(chain.length, 2);
    assert_eq!(canonical_hash(&chain.chain[0]), chain.chain[1].previous_hash);
    assert!(valid_chain(&chain.chain, d2()));

    let acl = n.client.acl().await.unwrap();
    assert_eq!(acl.applied.get("02:00:00:00:00:01"), Some(&Action::Allow));
    assert_eq!(acl.acl["02:00:00:00:00:01"]["action"], "allow");
    n.stop().await;
}

#[tokio::test]
async fn resolve_without_peers_and_with_unreachable_peer() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let r = n.client.resolve().await.unwrap();
    assert!(!r.replaced);
    assert_eq!((r.length, r.report.peers_queried), (1, 0));

    // Port 9 on loopback: nothing listens there in the test sandbox.
    n.client.register(vec!["http://127.0.0.1:9".into()]).await.unwrap();
    let r = n.client.resolve().await.unwrap();
    assert!(!r.replaced);
    assert_eq!(r.report.peers_unreachable, 1);
    n.stop().await;
}

#[tokio::test]
async fn longer_peer_chain_is_adopted_byte_for_byte() {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = start(da.path(), None).await;
    let b = start(db.path(), None).await;
    for mac in ["02:00:00:00:00:0a", "02:00:00:00:00:0b"] {
        a.client.submit(&tx(mac, "allow")).await.unwrap();
        a.client.forge().await.unwrap();
    }
    b.client.register(vec![a.url.clone()]).await.unwrap();
    let r = b.client.resolve().await.unwrap();
    assert!(r.replaced);
    assert_eq!(r.length, 3);
    assert_eq!(r.report.adopted_from.as_ref().map(|p| p.to_string()), Some(a.url.clone()));
    assert_eq!(r.report.validation.total(), 4);

    let ca = a.client.chain().await.unwrap().chain;
    let cb = b.client.chain().await.unwrap().chain;
    let json = |c: &[Block]| c.iter().map(Block::canonical_json).collect::<Vec<_>>();
    assert_eq!(json(&ca), json(&cb));

    let acl = b.client.acl().await.unwrap();
    let macs: BTreeSet<&str> = acl.applied.keys().map(String::as_str).collect();
    assert_eq!(macs, BTreeSet::from(["02:00:00:00:00:0a", "02:00:00:00:00:0b"]));

    // Equal length never displaces.
    a.client.register(vec![b.url.clone()]).await.unwrap();
    assert!(!a.client.resolve().await.unwrap().replaced);
    a.stop().await;
    b.stop().await;
}

#[tokio::test]
async fn bearer_token_guards_nodes_and_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), Some("s3cret")).await;
    let anonymous = redes_node::NodeClient::new(&n.url, None);
    let wrong = redes_node::NodeClient::new(&n.url, Some("nope".into()));
    assert_eq!(status(anonymous.register(vec!["http://10.0.0.2:5000".into()]).await.unwrap_err()), 401);
    assert_eq!(status(wrong.forge().await.unwrap_err()), 401);
    assert_eq!(status(anonymous.resolve().await.unwrap_err()), 401);
    assert_eq!(anonymous.chain().await.unwrap().length, 1);
    anonymous.submit(&tx("02:00:00:00:00:01", "allow")).await.unwrap();

    assert_eq!(n.client.register(vec!["http://10.0.0.2:5000".into()]).await.unwrap().total, 1);
    assert_eq!(n.client.forge().await.unwrap().block.index, 2);
    n.stop().await;
}

#[tokio::test]
async fn restart_restores_chain_acl_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let id = n.node.node_id().to_string();
    for mac in ["02:00:00:00:00:01", "02:00:00:00:00:02"] {
        n.client.submit(&tx(mac, "allow")).await.unwrap();
        n.client.forge().await.unwrap();
    }
    let tip = n.client.chain().await.unwrap().chain.last().unwrap().hash();
    n.stop().await;

    let n = start(dir.path(), None).await;
    assert_eq!(n.node.node_id(), id);
    let chain = n.client.chain().await.unwrap();
    assert_eq!(chain.length, 3);
    assert_eq!(chain.chain.last().unwrap().hash(), tip);
    assert_eq!(n.client.acl().await.unwrap().applied.len(), 2);
    n.stop().await;
}

#[tokio::test]
async fn adopted_chain_survives_restart() {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = start(da.path(), None).await;
    let b = start(db.path(), None).await;
    b.client.submit(&tx("02:00:00:00:00:0f", "allow")).await.unwrap();
    b.client.forge().await.unwrap();
    for mac in ["02:00:00:00:00:01", "02:00:00:00:00:02"] {
        a.client.submit(&tx(mac, "allow")).await.unwrap();
        a.client.forge().await.unwrap();
    }
    b.client.register(vec![a.url.clone()]).await.unwrap();
    assert!(b.client.resolve().await.unwrap().replaced);
    let expected = a.client.chain().await.unwrap().chain;
    b.stop().await;

    let b = start(db.path(), None).await;
    assert_eq!(b.client.chain().await.unwrap().chain, expected);
    // The losing fork's MAC is gone from enforcement after replay.
    assert!(!b.client.acl().await.unwrap().applied.contains_key("02:00:00:00:00:0f"));
    a.stop().await;
    b.stop().await;
}

#[tokio::test]
async fn torn_tail_is_truncated_and_foreign_log_refused() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    n.client.submit(&tx("02:00:00:00:00:01", "allow")).await.unwrap();
    n.client.forge().await.unwrap();
    n.stop().await;

    let log = dir.path().join("chain.jsonl");
    let mut bytes = std::fs::read(&log).unwrap();
    bytes.extend_from_slice(b"{\"index\":3,\"previous");
    std::fs::write(&log, &bytes).unwrap();
    let n = start(dir.path(), None).await;
    assert_eq!(n.client.chain().await.unwrap().length, 2);
    n.stop().await;

    std::fs::write(&log, "{\"not\":\"a block\"}\n").unwrap();
    let err = redes_node::Node::open(&common::config(dir.path(), None)).err().unwrap();
    assert_eq!(err.exit_code(), 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_calls_keep_state_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let n = start(dir.path(), None).await;
    let mut tasks = Vec::new();
    for i in 0..24u8 {
        let client = n.client.clone();
        tasks.push(tokio::spawn(async move {
            client.submit(&tx(&format!("02:00:00:00:01:{i:02x}"), "allow")).await.unwrap();
            // Forges may find the pool already drained or lose a tip race.
            match client.forge().await {
                Ok(_) => {}
                Err(ClientError::Api { status: 409, .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    let state = n.node.lock().await;
    assert!(valid_chain(state.chain.blocks(), d2()));
    let in_chain: usize = state.chain.blocks().iter().map(|b| b.transactions.len()).sum();
    assert_eq!(in_chain + state.pending.len(), 24);
    let macs: BTreeSet<String> = state
        .chain
        .blocks()
        .iter()
        .flat_map(|b| b.transactions.iter().map(|t| t.mac.to_string()))
        .chain(state.pending.iter().map(|t| t.mac.to_string()))
        .collect();
    assert_eq!(macs.len(), 24);
    drop(state);
    n.stop().await;
}
