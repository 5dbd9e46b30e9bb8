use crate::ledger::Difficulty;

use super::scenario::Topology;
use super::sim::{FixpointOutcome, Simulation};

/// Node 0 forges `lead` blocks so it alone holds the longest chain.
fn seeded_leader(nodes: usize, topology: &Topology, lead: usize, difficulty: Difficulty, seed: u64) -> Simulation {
    let mut sim = Simulation::new(nodes, topology, difficulty, seed).expect("nodes > 0");
    for _ in 0..lead {
        sim.submit_tx(0, None, "allow").expect("generated transaction is valid");
        sim.forge(0).expect("pool holds one transaction");
    }
    sim
}

/// Synchronous rounds until every node holds the same chain, or `None` if
/// that has not happened after `max_rounds`.
pub fn rounds_to_converge(
    nodes: usize,
    topology: &Topology,
    max_rounds: usize,
    difficulty: Difficulty,
    seed: u64,
) -> Option<usize> {
    let mut sim = seeded_leader(nodes, topology, 2, difficulty, seed);
    if sim.chains_equal() {
        return Some(0);
    }
    (1..=max_rounds).find(|_| {
        sim.resolve_round();
        sim.chains_equal()
    })
}

/// Whether `rounds` synchronous rounds bring every node onto the single
/// longest chain held by node 0.
pub fn convergence_test(nodes: usize, topology: &Topology, rounds: usize, difficulty: Difficulty, seed: u64) -> bool {
    let mut sim = seeded_leader(nodes, topology, 2, difficulty, seed);
    for _ in 0..rounds {
        sim.resolve_round();
    }
    sim.chains_equal() && sim.acls_equal()
}

/// Nodes 0 and 1 each forge a different block on genesis, then everyone
/// resolves to a fixpoint. Equal lengths never displace each other, so this
/// ends in a stalemate.
pub fn equal_length_divergence(nodes: usize, difficulty: Difficulty, seed: u64) -> FixpointOutcome {
    let mut sim = Simulation::new(nodes.max(2), &Topology::FullMesh, difficulty, seed).expect("nodes > 0");
    for node in 0..2 {
        sim.submit_tx(node, None, "allow").expect("generated transaction is valid");
        sim.forge(node).expect("pool holds one transaction");
    }
    sim.resolve_until_fixpoint(16)
}
