use serde::{Deserialize, Serialize};

use crate::ledger::Difficulty;

/// Who registers whom. Registration is symmetric.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    #[default]
    FullMesh,
    /// Node `i` peers with `i - 1` and `i + 1`.
    Path,
    Edges { edges: Vec<(usize, usize)> },
}

impl Topology {
    pub fn neighbors(&self, nodes: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); nodes];
        match self {
            Topology::FullMesh => {
                for (i, list) in adj.iter_mut().enumerate() {
                    list.extend((0..nodes).filter(|&j| j != i));
                }
            }
            Topology::Path => {
                for i in 1..nodes {
                    adj[i - 1].push(i);
                    adj[i].push(i - 1);
                }
            }
            Topology::Edges { edges } => {
                for &(a, b) in edges {
                    if a < nodes && b < nodes && a != b {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
                for list in &mut adj {
                    list.sort_unstable();
                    list.dedup();
                }
            }
        }
        adj
    }
}

fn default_action() -> String {
    "allow".into()
}

fn default_max_rounds() -> usize {
    32
}

/// One scripted step. Nodes are addressed by zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Event {
    /// Queue a transaction at `node`. Without `mac`, a seeded random
    /// locally administered address is used.
    SubmitTx {
        node: usize,
        #[serde(default)]
        mac: Option<String>,
        #[serde(default = "default_action")]
        action: String,
    },
    /// Mine the node's pending pool into a block on its own tip.
    Forge { node: usize },
    /// One node resolves against the live state of its reachable peers.
    Resolve { node: usize },
    /// Every node resolves once against a snapshot taken at round start.
    ResolveRound,
    /// Repeat rounds until one changes nothing, or `max_rounds` is hit.
    ResolveUntilFixpoint {
        #[serde(default = "default_max_rounds")]
        max_rounds: usize,
    },
    /// Only nodes within the same group can reach each other. Unlisted
    /// nodes are isolated.
    Partition { groups: Vec<Vec<usize>> },
    Heal,
}

fn default_difficulty() -> Difficulty {
    Difficulty::new(2).expect("2 is in range")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub nodes: usize,
    #[serde(default = "default_difficulty")]
    pub difficulty: Difficulty,
    #[serde(default)]
    pub topology: Topology,
    pub script: Vec<Event>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_json(
            r#"{"seed":1,"nodes":2,"script":[{"op":"submit_tx","node":0},{"op":"forge","node":0},
                {"op":"resolve_until_fixpoint"},{"op":"partition","groups":[[0],[1]]},{"op":"heal"}]}"#,
        )
        .unwrap();
        assert_eq!(s.topology, Topology::FullMesh);
        assert_eq!(s.difficulty.leading_zero_hex_digits(), 2);
        assert_eq!(
            s.script[0],
            Event::SubmitTx { node: 0, mac: None, action: "allow".into() }
        );
        assert_eq!(s.script[2], Event::ResolveUntilFixpoint { max_rounds: 32 });
    }

    #[test]
    fn path_neighbors() {
        assert_eq!(Topology::Path.neighbors(3), vec![vec![1], vec![0, 2], vec![1]]);
        assert_eq!(Topology::FullMesh.neighbors(3)[1], vec![0, 2]);
        let edges = Topology::Edges { edges: vec![(0, 2), (2, 0), (1, 1), (0, 9)] };
        assert_eq!(edges.neighbors(3), vec![vec![2], vec![], vec![0]]);
    }
}
