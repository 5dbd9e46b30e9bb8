//! Permissioned peer registry and longest-valid-chain conflict resolution.
//!
//! Chain changes are surfaced as [`ChainEvent`]s, which the access-control
//! layer consumes in order. Validation itself never touches the firewall.

mod accept;
mod peer;
mod resolve;

pub use accept::{accept_block, AcceptError};
pub use peer::{PeerAddr, PeerRegistry, RegistryError};
pub use resolve::{resolve_conflicts, ChainSource, Resolution, ResolutionReport};

use crate::ledger::{Block, Chain};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainEvent {
    /// One block was appended to the local tip.
    BlockApplied(Block),
    /// The local chain was replaced by a longer peer chain.
    Adopted(Chain),
}
