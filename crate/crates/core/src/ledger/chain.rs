use std::fmt;

use serde::{Deserialize, Serialize};

use super::block::{canonical_hash, Block, Timestamp};
use super::pow::{mine_proof, valid_proof, Difficulty};
use super::transaction::Transaction;

/// Why a candidate block sequence is not a valid chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    Empty,
    GenesisMismatch,
    BrokenLinkage,
    IndexGap,
    ProofRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("invalid chain at position {position}: {kind:?}")]
pub struct ChainFault {
    /// Zero-based position of the offending block.
    pub position: usize,
    pub kind: FaultKind,
}

impl ChainFault {
    /// Hashes a sequential walk evaluates before it stops at this fault.
    pub fn work_spent(&self) -> HashWork {
        if self.position == 0 {
            return HashWork::default();
        }
        let clean = (self.position - 1) as u64;
        let mut work = HashWork { linkage_hashes: clean + 1, proof_checks: clean };
        if self.kind == FaultKind::ProofRejected {
            work.proof_checks += 1;
        }
        work
    }
}

/// Hash evaluations spent validating a chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashWork {
    pub linkage_hashes: u64,
    pub proof_checks: u64,
}

impl HashWork {
    pub fn total(&self) -> u64 {
        self.linkage_hashes + self.proof_checks
    }
}

impl std::ops::AddAssign for HashWork {
    fn add_assign(&mut self, rhs: HashWork) {
        self.linkage_hashes += rhs.linkage_hashes;
        self.proof_checks += rhs.proof_checks;
    }
}

fn check_link(prev: &Block, block: &Block, difficulty: Difficulty) -> Option<FaultKind> {
    if block.previous_hash != canonical_hash(prev) {
        return Some(FaultKind::BrokenLinkage);
    }
    if prev.index.checked_add(1) != Some(block.index) {
        return Some(FaultKind::IndexGap);
    }
    if !valid_proof(prev.proof, block.proof, difficulty) {
        return Some(FaultKind::ProofRejected);
    }
    None
}

fn check_genesis(blocks: &[Block]) -> Result<(), ChainFault> {
    match blocks.first() {
        None => Err(ChainFault { position: 0, kind: FaultKind::Empty }),
        Some(first) if *first != Block::genesis() => {
            Err(ChainFault { position: 0, kind: FaultKind::GenesisMismatch })
        }
        Some(_) => Ok(()),
    }
}

fn work_for(len: usize) -> HashWork {
    let links = len.saturating_sub(1) as u64;
    HashWork { linkage_hashes: links, proof_checks: links }
}

pub fn verify_chain_sequential(blocks: &[Block], difficulty: Difficulty) -> Result<HashWork, ChainFault> {
    check_genesis(blocks)?;
    for (i, pair) in blocks.windows(2).enumerate() {
        if let Some(kind) = check_link(&pair[0], &pair[1], difficulty) {
            return Err(ChainFault { position: i + 1, kind });
        }
    }
    Ok(work_for(blocks.len()))
}

/// Checks every adjacent pair concurrently; reports the earliest fault, same
/// as the sequential walk.
#[cfg(feature = "parallel")]
pub fn verify_chain_parallel(blocks: &[Block], difficulty: Difficulty) -> Result<HashWork, ChainFault> {
    use rayon::prelude::*;

    check_genesis(blocks)?;
    let fault = blocks
        .par_windows(2)
        .enumerate()
        .find_map_first(|(i, pair)| {
            check_link(&pair[0], &pair[1], difficulty).map(|kind| ChainFault { position: i + 1, kind })
        });
    match fault {
        Some(fault) => Err(fault),
        None => Ok(work_for(blocks.len())),
    }
}

/// Full validation: fixed genesis, then hash linkage, index continuity and
/// proof for every adjacent pair. A valid chain of length `L` costs
/// `L - 1` linkage hashes plus `L - 1` proof checks.
pub fn verify_chain(blocks: &[Block], difficulty: Difficulty) -> Result<HashWork, ChainFault> {
    #[cfg(feature = "parallel")]
    {
        if blocks.len() >= 64 {
            return verify_chain_parallel(blocks, difficulty);
        }
    }
    verify_chain_sequential(blocks, difficulty)
}

/// Pure validity check. Performs no access-control side effects.
pub fn valid_chain(blocks: &[Block], difficulty: Difficulty) -> bool {
    verify_chain(blocks, difficulty).is_ok()
}

/// A validated, non-empty block sequence rooted at the genesis block.
#[derive(Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain")
            .field("len", &self.blocks.len())
            .field("tip", &self.tip().hash())
            .finish()
    }
}

impl Default for Chain {
    fn default() -> Self {
        Chain::genesis()
    }
}

impl Chain {
    pub fn genesis() -> Chain {
        Chain { blocks: vec![Block::genesis()] }
    }

    pub fn from_blocks(blocks: Vec<Block>, difficulty: Difficulty) -> Result<Chain, ChainFault> {
        verify_chain(&blocks, difficulty)?;
        Ok(Chain { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Always false; a chain holds at least the genesis block.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain holds genesis")
    }

    /// Caller has already run [`verify_chain`] over `blocks`.
    pub(crate) fn from_verified(blocks: Vec<Block>) -> Chain {
        debug_assert!(!blocks.is_empty());
        Chain { blocks }
    }

    /// Caller has already checked that `block` extends the tip.
    pub(crate) fn push_verified(&mut self, block: Block) {
        debug_assert_eq!(block.index, self.tip().index + 1);
        self.blocks.push(block);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("no pending transactions to forge")]
    EmptyPending,
}

/// A freshly mined block plus the hash attempts its proof cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forged {
    pub block: Block,
    pub attempts: u64,
}

/// Builds and mines the block that extends `chain` with `pending`, in
/// submission order. The caller drains its pool once the block is accepted.
pub fn forge_block(
    chain: &Chain,
    pending: &[Transaction],
    difficulty: Difficulty,
    timestamp: Timestamp,
) -> Result<Forged, ForgeError> {
    forge_on_tip(chain.tip(), pending, difficulty, timestamp)
}

/// Same as [`forge_block`] given only the current tip, so callers can mine
/// without holding the whole chain.
pub fn forge_on_tip(
    tip: &Block,
    pending: &[Transaction],
    difficulty: Difficulty,
    timestamp: Timestamp,
) -> Result<Forged, ForgeError> {
    if pending.is_empty() {
        return Err(ForgeError::EmptyPending);
    }
    let mined = mine_proof(tip.proof, difficulty);
    Ok(Forged {
        block: Block {
            index: tip.index + 1,
            previous_hash: canonical_hash(tip),
            proof: mined.proof,
            timestamp,
            transactions: pending.to_vec(),
        },
        attempts: mined.attempts,
    })
}
