use crate::ledger::{Action, MacAddr};

use super::command::CommandStep;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("injected failure for {0}")]
    Injected(MacAddr),
    #[error("step {step} ({name:?}) failed with status {status:?}: {command}")]
    CommandFailed {
        /// One-based position of the step within the invoked sequence.
        step: usize,
        name: CommandStep,
        command: String,
        status: Option<i32>,
    },
    #[error("could not launch {command}: {message}")]
    Spawn { command: String, message: String },
}

/// Enforcement layer that turns access decisions into firewall state.
/// Implementations must tolerate repeated calls with the same arguments.
pub trait ActuatorBackend {
    fn apply(&mut self, mac: MacAddr, action: Action) -> Result<(), BackendError>;

    /// Drops any rule for `mac`; unknown addresses are a no-op.
    fn revoke(&mut self, mac: MacAddr) -> Result<(), BackendError>;
}

impl<B: ActuatorBackend + ?Sized> ActuatorBackend for Box<B> {
    fn apply(&mut self, mac: MacAddr, action: Action) -> Result<(), BackendError> {
        (**self).apply(mac, action)
    }

    fn revoke(&mut self, mac: MacAddr) -> Result<(), BackendError> {
        (**self).revoke(mac)
    }
}
