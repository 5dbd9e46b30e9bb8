//! Blocks, transactions, canonical hashing and the issuer-side proof of work.
//!
//! Every block carries the proof found by its issuer; a block's proof must
//! satisfy the difficulty predicate against its predecessor's proof, and its
//! `previous_hash` must equal the SHA-256 of the predecessor's canonical JSON.

mod block;
mod chain;
mod mac;
mod pow;
mod transaction;

pub use block::{canonical_hash, Block, Timestamp, GENESIS_PREVIOUS_HASH, GENESIS_PROOF};
pub use chain::{
    forge_block, forge_on_tip, valid_chain, verify_chain, verify_chain_sequential, Chain, ChainFault, FaultKind,
    ForgeError, Forged, HashWork,
};
#[cfg(feature = "parallel")]
pub use chain::verify_chain_parallel;
pub use mac::{InvalidMac, MacAddr};
#[cfg(feature = "parallel")]
pub use pow::mine_proof_parallel;
pub use pow::{mine_proof, mine_proof_sequential, valid_proof, Difficulty, InvalidDifficulty, Mined};
pub use transaction::{new_transaction, Action, NodeId, Transaction, TxError, MAX_IDENTIFIER_LEN};
