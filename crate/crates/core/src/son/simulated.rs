use std::collections::BTreeMap;

use crate::ledger::{Action, MacAddr};

use super::backend::{ActuatorBackend, BackendError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirewallOp {
    Apply(MacAddr, Action),
    Revoke(MacAddr),
}

/// In-memory rule table standing in for a router firewall. The journal only
/// records calls that changed the table.
#[derive(Debug, Clone, Default)]
pub struct SimulatedFirewall {
    rules: BTreeMap<MacAddr, Action>,
    journal: Vec<FirewallOp>,
    calls: u64,
    fail_next: usize,
}

impl SimulatedFirewall {
    pub fn new() -> Self {
        Self::default()
    }

    /// The next `n` effect calls fail without touching the table.
    pub fn fail_next(&mut self, n: usize) {
        self.fail_next = n;
    }

    pub fn query(&self, mac: &MacAddr) -> Option<Action> {
        self.rules.get(mac).copied()
    }

    pub fn rules(&self) -> &BTreeMap<MacAddr, Action> {
        &self.rules
    }

    pub fn journal(&self) -> &[FirewallOp] {
        &self.journal
    }

    /// Every apply/revoke invocation, effective or not.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn injected(&mut self, mac: MacAddr) -> Result<(), BackendError> {
        self.calls += 1;
        if self.fail_next > 0 {
            self.fail_next -= 1;
            return Err(BackendError::Injected(mac));
        }
        Ok(())
    }
}

impl ActuatorBackend for SimulatedFirewall {
    fn apply(&mut self, mac: MacAddr, action: Action) -> Result<(), BackendError> {
        self.injected(mac)?;
        if self.rules.insert(mac, action) != Some(action) {
            self.journal.push(FirewallOp::Apply(mac, action));
        }
        Ok(())
    }

    fn revoke(&mut self, mac: MacAddr) -> Result<(), BackendError> {
        self.injected(mac)?;
        if self.rules.remove(&mac).is_some() {
            self.journal.push(FirewallOp::Revoke(mac));
        }
        Ok(())
    }
}
