use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ledger::{verify_chain, Block, Chain, Difficulty, HashWork};

use super::{ChainEvent, PeerAddr, PeerRegistry};

/// Something that can hand back a peer's current chain. `None` means the
/// peer could not be reached or answered with garbage.
pub trait ChainSource {
    fn fetch_chain(&self, peer: &PeerAddr) -> Option<Vec<Block>>;
}

impl<F> ChainSource for F
where
    F: Fn(&PeerAddr) -> Option<Vec<Block>>,
{
    fn fetch_chain(&self, peer: &PeerAddr) -> Option<Vec<Block>> {
        self(peer)
    }
}

impl ChainSource for HashMap<PeerAddr, Vec<Block>> {
    fn fetch_chain(&self, peer: &PeerAddr) -> Option<Vec<Block>> {
        self.get(peer).cloned()
    }
}

impl ChainSource for BTreeMap<PeerAddr, Vec<Block>> {
    fn fetch_chain(&self, peer: &PeerAddr) -> Option<Vec<Block>> {
        self.get(peer).cloned()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub replaced: bool,
    pub adopted_from: Option<PeerAddr>,
    pub old_length: usize,
    pub new_length: usize,
    pub peers_queried: usize,
    pub peers_unreachable: usize,
    pub peers_invalid_chain: usize,
    /// Hashes spent validating candidate chains.
    pub validation: HashWork,
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub report: ResolutionReport,
    pub adopted: Option<Chain>,
}

impl Resolution {
    /// Installs the adopted chain if it is still strictly longer than
    /// `local`. Returns the adoption event for the access-control layer.
    pub fn apply(self, local: &mut Chain) -> Option<ChainEvent> {
        match self.adopted {
            Some(chain) if chain.len() > local.len() => {
                *local = chain.clone();
                Some(ChainEvent::Adopted(chain))
            }
            _ => None,
        }
    }
}

/// Longest-valid-chain rule: every registered peer is asked for its chain in
/// address order, and a candidate replaces the running best only when it is
/// strictly longer and passes full validation. Equal-length chains never
/// displace the local one.
pub fn resolve_conflicts(
    local: &Chain,
    registry: &PeerRegistry,
    source: &impl ChainSource,
    difficulty: Difficulty,
) -> Resolution {
    let mut report = ResolutionReport {
        old_length: local.len(),
        new_length: local.len(),
        ..Default::default()
    };
    let mut max_length = local.len();
    let mut best: Option<(PeerAddr, Chain)> = None;

    for peer in registry.iter() {
        report.peers_queried += 1;
        let Some(blocks) = source.fetch_chain(peer) else {
            report.peers_unreachable += 1;
            continue;
        };
        if blocks.len() <= max_length {
            continue;
        }
        match verify_chain(&blocks, difficulty) {
            Ok(work) => {
                report.validation += work;
                max_length = blocks.len();
                best = Some((peer.clone(), Chain::from_verified(blocks)));
            }
            Err(fault) => {
                tracing::debug!(%peer, ?fault, "peer offered an invalid chain");
                report.validation += fault.work_spent();
                report.peers_invalid_chain += 1;
            }
        }
    }

    let adopted = best.map(|(peer, chain)| {
        report.replaced = true;
        report.adopted_from = Some(peer);
        report.new_length = chain.len();
        chain
    });
    Resolution { report, adopted }
}
