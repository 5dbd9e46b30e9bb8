use std::collections::BTreeMap;

use serde::Serialize;

use crate::ledger::{Action, Block, MacAddr};

/// One materialized access decision and the transaction that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AclEntry {
    pub action: Action,
    pub block_index: u64,
    pub tx_position: usize,
}

/// MAC → allow/deny, the last-writer-wins fold of every transaction in chain
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AclState {
    entries: BTreeMap<MacAddr, AclEntry>,
}

impl AclState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pure fold of a block sequence, genesis first.
    pub fn from_blocks(blocks: &[Block]) -> Self {
        let mut acl = AclState::new();
        for block in blocks {
            acl.fold_block(block);
        }
        acl
    }

    pub fn fold_block(&mut self, block: &Block) {
        for (position, tx) in block.transactions.iter().enumerate() {
            self.entries.insert(
                tx.mac,
                AclEntry { action: tx.action, block_index: block.index, tx_position: position },
            );
        }
    }

    pub fn get(&self, mac: &MacAddr) -> Option<&AclEntry> {
        self.entries.get(mac)
    }

    pub fn action(&self, mac: &MacAddr) -> Option<Action> {
        self.entries.get(mac).map(|e| e.action)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MacAddr, &AclEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
