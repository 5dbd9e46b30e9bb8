use std::collections::BTreeMap;

use crate::consensus::ChainEvent;
use crate::ledger::{Action, Block, MacAddr};

use super::acl::AclState;
use super::backend::{ActuatorBackend, BackendError};

/// Backend calls issued while bringing enforcement in line with the ACL.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EffectReport {
    pub applied: usize,
    pub revoked: usize,
    pub failures: Vec<BackendError>,
}

impl EffectReport {
    pub fn calls(&self) -> usize {
        self.applied + self.revoked + self.failures.len()
    }
}

/// Keeps an ACL in step with the local chain and pushes the difference to a
/// backend.
///
/// The ACL is always updated, even when the backend fails; failed entries
/// stay out of `applied` and are retried on the next event.
#[derive(Debug, Clone)]
pub struct SonActuator<B> {
    acl: AclState,
    applied: BTreeMap<MacAddr, Action>,
    backend: B,
}

impl<B: ActuatorBackend> SonActuator<B> {
    pub fn new(backend: B) -> Self {
        SonActuator { acl: AclState::new(), applied: BTreeMap::new(), backend }
    }

    pub fn acl(&self) -> &AclState {
        &self.acl
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn backend_mut(&mut self) -> &mut B {
        &mut self.backend
    }

    /// What the backend is known to enforce.
    pub fn applied(&self) -> &BTreeMap<MacAddr, Action> {
        &self.applied
    }

    /// Folds one accepted block into the ACL, then syncs the backend.
    pub fn process_son(&mut self, block: &Block) -> EffectReport {
        self.acl.fold_block(block);
        self.sync()
    }

    /// Recomputes the ACL from genesis and issues only the delta against the
    /// backend's last known state, revoking entries the new chain lacks.
    pub fn replay_chain(&mut self, blocks: &[Block]) -> EffectReport {
        self.acl = AclState::from_blocks(blocks);
        self.sync()
    }

    pub fn handle(&mut self, event: &ChainEvent) -> EffectReport {
        match event {
            ChainEvent::BlockApplied(block) => self.process_son(block),
            ChainEvent::Adopted(chain) => self.replay_chain(chain.blocks()),
        }
    }

    fn sync(&mut self) -> EffectReport {
        let mut report = EffectReport::default();
        let wanted: Vec<(MacAddr, Action)> = self
            .acl
            .iter()
            .filter(|(mac, entry)| self.applied.get(*mac) != Some(&entry.action))
            .map(|(mac, entry)| (*mac, entry.action))
            .collect();
        for (mac, action) in wanted {
            match self.backend.apply(mac, action) {
                Ok(()) => {
                    self.applied.insert(mac, action);
                    report.applied += 1;
                }
                Err(e) => {
                    tracing::warn!(%mac, error = %e, "firewall apply failed");
                    report.failures.push(e);
                }
            }
        }
        let stale: Vec<MacAddr> =
            self.applied.keys().filter(|mac| self.acl.get(mac).is_none()).copied().collect();
        for mac in stale {
            match self.backend.revoke(mac) {
                Ok(()) => {
                    self.applied.remove(&mac);
                    report.revoked += 1;
                }
                Err(e) => {
                    tracing::warn!(%mac, error = %e, "firewall revoke failed");
                    report.failures.push(e);
                }
            }
        }
        report
    }
}

/// ACL for a block sequence without touching any backend.
pub fn replay_acl(blocks: &[Block]) -> AclState {
    AclState::from_blocks(blocks)
}
