//! Permissioned hash-linked ledger for decentralized network access control.
//!
//! Nodes keep a chain of access decisions (`MAC → allow/deny`), mine the
//! proof for each block they issue, adopt the longest valid chain offered by
//! their registered peers, and fold the accepted chain into a firewall ACL.
//!
//! * [`ledger`]: blocks, canonical hashing, proof of work, chain validation.
//! * [`consensus`]: peer registry, block acceptance, conflict resolution.
//! * [`son`]: ACL materialization and firewall backends.
//! * [`store`]: crash-tolerant chain log.
//! * [`netsim`]: deterministic in-process multi-node simulation.
//!
//! With the default `parallel` feature, proof search, long-chain validation
//! and simulation sweeps run on the rayon pool. Results are identical to the
//! sequential paths.

pub mod consensus;
pub mod ledger;
pub mod netsim;
pub mod son;
pub mod store;
