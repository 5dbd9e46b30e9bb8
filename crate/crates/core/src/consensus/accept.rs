use crate::ledger::{canonical_hash, valid_proof, Block, Chain, Difficulty};

use super::ChainEvent;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AcceptError {
    #[error("block {index} extends an ancestor, not the tip at {tip}")]
    StaleBlock { index: u64, tip: u64 },
    #[error("block {index} does not link to the tip")]
    BadLinkage { index: u64 },
    #[error("block {index} carries a proof that fails the difficulty predicate")]
    BadProof { index: u64 },
}

/// Appends `block` if it extends the tip; the returned event asks the
/// access-control layer to apply exactly this block.
pub fn accept_block(local: &mut Chain, block: Block, difficulty: Difficulty) -> Result<ChainEvent, AcceptError> {
    let tip = local.tip();
    let index = block.index;
    if index <= tip.index {
        let extends_ancestor = index >= 2
            && local
                .blocks()
                .get((index - 2) as usize)
                .is_some_and(|parent| canonical_hash(parent) == block.previous_hash);
        if extends_ancestor {
            return Err(AcceptError::StaleBlock { index, tip: tip.index });
        }
        return Err(AcceptError::BadLinkage { index });
    }
    if index != tip.index + 1 || block.previous_hash != canonical_hash(tip) {
        return Err(AcceptError::BadLinkage { index });
    }
    if !valid_proof(tip.proof, block.proof, difficulty) {
        return Err(AcceptError::BadProof { index });
    }
    local.push_verified(block.clone());
    Ok(ChainEvent::BlockApplied(block))
}
