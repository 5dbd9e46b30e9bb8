use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use redes_core::ledger::{verify_chain, Difficulty};
use redes_core::netsim::{measure_linear_cost, run_scenario, CostConfig, Scenario};
use redes_node::wire::NewTransactionRequest;
use redes_node::{Node, NodeClient, NodeConfig};

#[derive(Parser)]
#[command(name = "redes", version, about = "Permissioned access-control ledger node and tools")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Base URL of the node to talk to.
    #[arg(long, global = true, env = "REDES_TARGET", default_value = "http://127.0.0.1:5000")]
    target: String,
    /// Bearer token for nodes that require one.
    #[arg(long, global = true, env = "REDES_TOKEN", hide_env_values = true)]
    token: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run or manage a node.
    #[command(subcommand)]
    Node(NodeCommand),
    /// Transactions.
    #[command(subcommand)]
    Tx(TxCommand),
    /// Blocks.
    #[command(subcommand)]
    Block(BlockCommand),
    /// Inspect the chain.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Ask the node to adopt the longest valid peer chain.
    Resolve,
    /// Access-control state.
    #[command(subcommand)]
    Acl(AclCommand),
    /// In-process network simulations.
    #[command(subcommand)]
    Sim(SimCommand),
}

#[derive(Subcommand)]
enum NodeCommand {
    /// Start the HTTP service.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Register or remove peers.
    #[command(subcommand)]
    Peers(PeersCommand),
}

#[derive(Subcommand)]
enum PeersCommand {
    Add {
        #[arg(required = true)]
        addrs: Vec<String>,
    },
    Remove {
        #[arg(required = true)]
        addrs: Vec<String>,
    },
}

#[derive(Subcommand)]
enum TxCommand {
    Submit(SubmitArgs),
}

#[derive(Args)]
struct SubmitArgs {
    #[arg(long)]
    sender: String,
    #[arg(long)]
    recipient: String,
    #[arg(long)]
    mac: String,
    #[arg(long, default_value = "allow")]
    action: String,
}

#[derive(Subcommand)]
enum BlockCommand {
    /// Mine the pending pool into a new block.
    Forge,
}

#[derive(Subcommand)]
enum ChainCommand {
    Show {
        /// Re-validate the fetched chain locally.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = Difficulty::default().leading_zero_hex_digits())]
        difficulty: u8,
    },
}

#[derive(Subcommand)]
enum AclCommand {
    Show,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Run a JSON scenario script.
    Run {
        scenario: PathBuf,
        /// Write per-node results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep hash cost against chain length.
    Cost {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        difficulty: u8,
        #[arg(long, default_value_t = 3)]
        nodes: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Write per-run rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    } else {
        println!("{}", text(value));
    }
}

fn difficulty(d: u8) -> anyhow::Result<Difficulty> {
    Difficulty::new(d).map_err(|e| anyhow::anyhow!(e))
}

async fn run_node(config: Option<PathBuf>) -> ExitCode {
    let config = match config {
        Some(path) => match NodeConfig::load(&path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => NodeConfig::default(),
    };
    let node = match Node::open(&config) {
        Ok(node) => Arc::new(node),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let listener = match tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: binding {}:{}: {e}", config.host, config.port);
            return ExitCode::from(1);
        }
    };
    let length = node.lock().await.chain.len();
    let port = listener.local_addr().map(|a| a.port()).unwrap_or(config.port);
    tracing::info!(port, node_id = node.node_id(), chain_length = length, "node listening");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match redes_node::serve(listener, node, shutdown).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

async fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let client = NodeClient::new(&cli.target, cli.token.clone());
    let json = cli.json;
    match cli.command {
        Command::Node(NodeCommand::Run { config }) => return Ok(run_node(config).await),
        Command::Node(NodeCommand::Peers(PeersCommand::Add { addrs })) => {
            let r = client.register(addrs).await?;
            emit(json, &r, |r| format!("registered {}; {} peers", r.registered.join(", "), r.total));
        }
        Command::Node(NodeCommand::Peers(PeersCommand::Remove { addrs })) => {
            let r = client.remove(addrs).await?;
            emit(json, &r, |r| {
                let mut out = format!("removed {}; {} peers", r.removed.join(", "), r.total);
                if !r.not_found.is_empty() {
                    out.push_str(&format!("\nnot registered: {}", r.not_found.join(", ")));
                }
                out
            });
        }
        Command::Tx(TxCommand::Submit(a)) => {
            let request = NewTransactionRequest {
                sender: Some(a.sender),
                recipient: Some(a.recipient),
                mac: Some(a.mac),
                action: Some(a.action),
            };
            let r = client.submit(&request).await?;
            emit(json, &r, |r| r.message.clone());
        }
        Command::Block(BlockCommand::Forge) => {
            let r = client.forge().await?;
            emit(json, &r, |r| {
                format!("index {}\nhash {}\nattempts {}", r.block.index, r.block.hash(), r.attempts)
            });
        }
        Command::Chain(ChainCommand::Show { verify, difficulty: d }) => {
            let r = client.chain().await?;
            if !verify {
                emit(json, &r, |r| {
                    let mut out = format!("length {}", r.length);
                    for b in &r.chain {
                        out.push_str(&format!("\n{} {} txs={} proof={}", b.index, b.hash(), b.transactions.len(), b.proof));
                    }
                    out
                });
                return Ok(ExitCode::SUCCESS);
            }
            let verdict = verify_chain(&r.chain, difficulty(d)?);
            #[derive(Serialize)]
            struct Verified {
                length: usize,
                valid: bool,
                fault: Option<String>,
            }
            let out = Verified {
                length: r.length,
                valid: verdict.is_ok(),
                fault: verdict.as_ref().err().map(|f| format!("{f:?}")),
            };
            emit(json, &out, |v| match &v.fault {
                None => format!("PASS length {}", v.length),
                Some(f) => format!("FAIL length {}: {f}", v.length),
            });
            if !out.valid {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Resolve => {
            let r = client.resolve().await?;
            emit(json, &r, |r| {
                let p = &r.report;
                format!(
                    "replaced {}\nlength {} -> {}\nadopted_from {}\npeers queried {} unreachable {} invalid {}\nvalidation hashes {}",
                    r.replaced,
                    p.old_length,
                    p.new_length,
                    p.adopted_from.as_ref().map_or("-".to_string(), |a| a.to_string()),
                    p.peers_queried,
                    p.peers_unreachable,
                    p.peers_invalid_chain,
                    p.validation.total()
                )
            });
        }
        Command::Acl(AclCommand::Show) => {
            let r = client.acl().await?;
            emit(json, &r, |r| {
                let mut out = String::new();
                if let Some(entries) = r.acl.as_object() {
                    for (mac, entry) in entries {
                        let applied = r.applied.get(mac).map_or("pending".to_string(), |a| a.to_string());
                        out.push_str(&format!("{mac} {} (enforced: {applied})\n", entry["action"].as_str().unwrap_or("?")));
                    }
                }
                out.trim_end().to_string()
            });
        }
        Command::Sim(SimCommand::Run { scenario, csv }) => {
            let text = std::fs::read_to_string(&scenario).with_context(|| format!("reading {}", scenario.display()))?;
            let scenario = Scenario::from_json(&text).with_context(|| format!("parsing {}", scenario.display()))?;
            let outcome = run_scenario(&scenario)?;
            if let Some(path) = csv {
                let m = &outcome.metrics;
                let mut out = String::from("node,chain_length,tip_hash,acl_entries,hash_attempts,validation_hashes\n");
                for (i, n) in outcome.nodes.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        n.id,
                        n.chain_length,
                        n.tip_hash,
                        n.acl.len(),
                        m.hash_attempts_by_node[i],
                        m.validation_hashes_by_node[i]
                    ));
                }
                std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(json, &outcome, |o| {
                let m = &o.metrics;
                format!(
                    "chains_equal {}\nacl_equality {}\nstalemate {}\nchain_lengths {:?}\nhash_attempts_total {}\nrounds_to_convergence {}",
                    m.chains_equal,
                    m.acl_equality,
                    m.stalemate,
                    m.chain_lengths,
                    m.hash_attempts_total,
                    m.resolution_rounds_to_convergence.map_or("-".to_string(), |r| r.to_string())
                )
            });
        }
        Command::Sim(SimCommand::Cost { blocks, difficulty: d, nodes, seeds, csv }) => {
            let config = CostConfig { block_counts: blocks, difficulty: difficulty(d)?, nodes, seeds: (0..seeds).collect() };
            let table = measure_linear_cost(&config);
            if let Some(path) = csv {
                std::fs::write(&path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(json, &table, |t| {
                format!(
                    "{}fit slope {:.2} intercept {:.2} r_squared {:.4}",
                    t.summary_csv(),
                    t.fit.slope,
                    t.fit.intercept,
                    t.fit.r_squared
                )
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
