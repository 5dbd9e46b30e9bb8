use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::consensus::{
    accept_block, resolve_conflicts, ChainEvent, PeerAddr, PeerRegistry, ResolutionReport,
};
use crate::ledger::{
    forge_block, new_transaction, Block, Chain, Difficulty, ForgeError, HashWork, MacAddr, NodeId,
    Timestamp, Transaction, TxError,
};
use crate::son::{AclState, SimulatedFirewall, SonActuator};

use super::scenario::{Event, Scenario, Topology};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("scenario needs at least one node")]
    NoNodes,
    #[error("event {event} references unknown node {node}")]
    UnknownNode { event: usize, node: usize },
    #[error("event {event}: {source}")]
    Transaction { event: usize, source: TxError },
    #[error("event {event}: node {node}: {source}")]
    Forge { event: usize, node: usize, source: ForgeError },
}

#[derive(Debug, Clone)]
pub struct SimNode {
    pub id: NodeId,
    pub address: PeerAddr,
    pub chain: Chain,
    pub pending: Vec<Transaction>,
    pub registry: PeerRegistry,
    pub son: SonActuator<SimulatedFirewall>,
    pub mining_attempts: u64,
    pub validation: HashWork,
    pub adoptions: usize,
}

impl SimNode {
    fn apply_event(&mut self, event: &ChainEvent) {
        self.son.handle(event);
    }
}

/// Result of driving resolution rounds until nothing changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixpointOutcome {
    /// Rounds executed, including the final quiet one.
    pub rounds: usize,
    /// Rounds after which all chains first matched, if they did.
    pub rounds_to_convergence: Option<usize>,
    pub converged: bool,
    /// Rounds stopped changing anything while chains still differ.
    pub stalemate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub hash_attempts_total: u64,
    pub hash_attempts_by_node: Vec<u64>,
    pub validation_hashes_by_node: Vec<u64>,
    /// From the most recent fixpoint event, or zero when chains were never
    /// out of step.
    pub resolution_rounds_to_convergence: Option<usize>,
    pub chain_lengths: Vec<usize>,
    pub chains_equal: bool,
    pub acl_equality: bool,
    pub stalemate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeSnapshot {
    pub id: String,
    pub chain_length: usize,
    pub tip_hash: String,
    pub acl: AclState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimOutcome {
    pub metrics: Metrics,
    pub nodes: Vec<NodeSnapshot>,
}

const CLOCK_START_MICROS: u64 = 1_700_000_000_000_000;

/// Single-threaded in-process network. Peers exchange chains by direct
/// handoff; reachability is registration plus the current partition.
#[derive(Debug, Clone)]
pub struct Simulation {
    nodes: Vec<SimNode>,
    by_address: HashMap<PeerAddr, usize>,
    difficulty: Difficulty,
    rng: ChaCha8Rng,
    clock: u64,
    group: Vec<usize>,
    last_fixpoint: Option<FixpointOutcome>,
}

impl Simulation {
    pub fn new(nodes: usize, topology: &Topology, difficulty: Difficulty, seed: u64) -> Result<Self, ScriptError> {
        if nodes == 0 {
            return Err(ScriptError::NoNodes);
        }
        let addresses: Vec<PeerAddr> = (0..nodes)
            .map(|i| PeerAddr::parse(&format!("http://node-{i}.sim:5000")).expect("well-formed"))
            .collect();
        let adjacency = topology.neighbors(nodes);
        let mut sim_nodes = Vec::with_capacity(nodes);
        for (i, address) in addresses.iter().enumerate() {
            let mut registry = PeerRegistry::new(Some(address.clone()));
            for &j in &adjacency[i] {
                registry.register(addresses[j].clone()).expect("distinct peer");
            }
            sim_nodes.push(SimNode {
                id: NodeId::new(format!("node-{i}")).expect("short id"),
                address: address.clone(),
                chain: Chain::genesis(),
                pending: Vec::new(),
                registry,
                son: SonActuator::new(SimulatedFirewall::new()),
                mining_attempts: 0,
                validation: HashWork::default(),
                adoptions: 0,
            });
        }
        Ok(Simulation {
            by_address: addresses.into_iter().enumerate().map(|(i, a)| (a, i)).collect(),
            nodes: sim_nodes,
            difficulty,
            rng: ChaCha8Rng::seed_from_u64(seed),
            clock: CLOCK_START_MICROS,
            group: vec![0; nodes],
            last_fixpoint: None,
        })
    }

    pub fn nodes(&self) -> &[SimNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &SimNode {
        &self.nodes[i]
    }

    pub fn difficulty(&self) -> Difficulty {
        self.difficulty
    }

    fn check(&self, event: usize, node: usize) -> Result<(), ScriptError> {
        if node < self.nodes.len() {
            Ok(())
        } else {
            Err(ScriptError::UnknownNode { event, node })
        }
    }

    fn random_mac(&mut self) -> MacAddr {
        let mut octets: [u8; 6] = self.rng.random();
        // Locally administered, unicast.
        octets[0] = (octets[0] & 0xfc) | 0x02;
        MacAddr::new(octets)
    }

    pub fn submit_tx(&mut self, node: usize, mac: Option<&str>, action: &str) -> Result<(), TxError> {
        let mac = match mac {
            Some(m) => m.to_string(),
            None => self.random_mac().to_string(),
        };
        let n = &self.nodes[node];
        let tx = new_transaction(n.id.as_str(), n.id.as_str(), &mac, action)?;
        self.nodes[node].pending.push(tx);
        Ok(())
    }

    /// Mines the pending pool on the node's tip and applies the block
    /// locally. Returns the proof attempts spent.
    pub fn forge(&mut self, node: usize) -> Result<u64, ForgeError> {
        self.clock += self.rng.random_range(1_000_000..2_000_000);
        let difficulty = self.difficulty;
        let n = &mut self.nodes[node];
        let forged = forge_block(&n.chain, &n.pending, difficulty, Timestamp::from_micros(self.clock))?;
        let event = accept_block(&mut n.chain, forged.block, difficulty).expect("forged block extends tip");
        n.pending.clear();
        n.mining_attempts += forged.attempts;
        n.apply_event(&event);
        Ok(forged.attempts)
    }

    fn reachable(&self, from: usize, to: usize) -> bool {
        self.group[from] == self.group[to]
    }

    fn resolve_against(&mut self, node: usize, chains: &[Vec<Block>]) -> ResolutionReport {
        let source = |peer: &PeerAddr| {
            let &j = self.by_address.get(peer)?;
            self.reachable(node, j).then(|| chains[j].clone())
        };
        let n = &self.nodes[node];
        let resolution = resolve_conflicts(&n.chain, &n.registry, &source, self.difficulty);
        let report = resolution.report.clone();
        let n = &mut self.nodes[node];
        n.validation += report.validation;
        if let Some(event) = resolution.apply(&mut n.chain) {
            n.adoptions += 1;
            n.apply_event(&event);
        }
        report
    }

    fn chain_snapshot(&self) -> Vec<Vec<Block>> {
        self.nodes.iter().map(|n| n.chain.blocks().to_vec()).collect()
    }

    /// One node resolves against peers' current chains.
    pub fn resolve(&mut self, node: usize) -> ResolutionReport {
        let chains = self.chain_snapshot();
        self.resolve_against(node, &chains)
    }

    /// Every node resolves once against the chains held at round start, so a
    /// chain moves at most one hop per round. Returns whether any node
    /// adopted a chain.
    pub fn resolve_round(&mut self) -> bool {
        let chains = self.chain_snapshot();
        let mut changed = false;
        for i in 0..self.nodes.len() {
            changed |= self.resolve_against(i, &chains).replaced;
        }
        changed
    }

    pub fn resolve_until_fixpoint(&mut self, max_rounds: usize) -> FixpointOutcome {
        let mut rounds = 0;
        let mut rounds_to_convergence = self.chains_equal().then_some(0);
        let mut quiet = false;
        while rounds < max_rounds {
            rounds += 1;
            let changed = self.resolve_round();
            if rounds_to_convergence.is_none() && self.chains_equal() {
                rounds_to_convergence = Some(rounds);
            }
            if !changed {
                quiet = true;
                break;
            }
        }
        let converged = self.chains_equal();
        let outcome = FixpointOutcome {
            rounds,
            rounds_to_convergence: if converged { rounds_to_convergence } else { None },
            converged,
            stalemate: quiet && !converged,
        };
        self.last_fixpoint = Some(outcome);
        outcome
    }

    pub fn partition(&mut self, groups: &[Vec<usize>]) {
        let n = self.nodes.len();
        // Unlisted nodes get their own group id past the listed ones.
        self.group = (0..n).map(|i| groups.len() + i).collect();
        for (g, members) in groups.iter().enumerate() {
            for &m in members {
                if m < n {
                    self.group[m] = g;
                }
            }
        }
    }

    pub fn heal(&mut self) {
        self.group = vec![0; self.nodes.len()];
    }

    pub fn chains_equal(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0].chain == w[1].chain)
    }

    pub fn acls_equal(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0].son.acl() == w[1].son.acl())
    }

    pub fn metrics(&self) -> Metrics {
        let by_node: Vec<u64> = self.nodes.iter().map(|n| n.mining_attempts).collect();
        let chains_equal = self.chains_equal();
        let rounds = match self.last_fixpoint {
            Some(f) => f.rounds_to_convergence,
            None => chains_equal.then_some(0),
        };
        Metrics {
            hash_attempts_total: by_node.iter().sum(),
            hash_attempts_by_node: by_node,
            validation_hashes_by_node: self.nodes.iter().map(|n| n.validation.total()).collect(),
            resolution_rounds_to_convergence: rounds,
            chain_lengths: self.nodes.iter().map(|n| n.chain.len()).collect(),
            chains_equal,
            acl_equality: self.acls_equal(),
            stalemate: self.last_fixpoint.is_some_and(|f| f.stalemate),
        }
    }

    pub fn snapshots(&self) -> Vec<NodeSnapshot> {
        self.nodes
            .iter()
            .map(|n| NodeSnapshot {
                id: n.id.to_string(),
                chain_length: n.chain.len(),
                tip_hash: n.chain.tip().hash(),
                acl: n.son.acl().clone(),
            })
            .collect()
    }

    pub fn run_event(&mut self, index: usize, event: &Event) -> Result<(), ScriptError> {
        match event {
            Event::SubmitTx { node, mac, action } => {
                self.check(index, *node)?;
                self.submit_tx(*node, mac.as_deref(), action)
                    .map_err(|source| ScriptError::Transaction { event: index, source })?;
            }
            Event::Forge { node } => {
                self.check(index, *node)?;
                self.forge(*node)
                    .map_err(|source| ScriptError::Forge { event: index, node: *node, source })?;
            }
            Event::Resolve { node } => {
                self.check(index, *node)?;
                self.resolve(*node);
            }
            Event::ResolveRound => {
                self.resolve_round();
            }
            Event::ResolveUntilFixpoint { max_rounds } => {
                self.resolve_until_fixpoint(*max_rounds);
            }
            Event::Partition { groups } => {
                for &m in groups.iter().flatten() {
                    self.check(index, m)?;
                }
                self.partition(groups);
            }
            Event::Heal => self.heal(),
        }
        Ok(())
    }
}

/// Executes a scenario from a fresh network.
pub fn run_scenario(scenario: &Scenario) -> Result<SimOutcome, ScriptError> {
    let mut sim = Simulation::new(scenario.nodes, &scenario.topology, scenario.difficulty, scenario.seed)?;
    for (i, event) in scenario.script.iter().enumerate() {
        sim.run_event(i, event)?;
    }
    Ok(SimOutcome { metrics: sim.metrics(), nodes: sim.snapshots() })
}
