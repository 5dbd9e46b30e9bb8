//! Chain state to network access control.
//!
//! [`AclState`] is a pure function of the chain. [`SonActuator`] owns the ACL
//! plus a backend and issues only the effects needed to make the backend
//! match it.

mod acl;
mod actuator;
mod backend;
mod command;
mod simulated;

pub use acl::{AclEntry, AclState};
pub use actuator::{replay_acl, EffectReport, SonActuator};
pub use backend::{ActuatorBackend, BackendError};
pub use command::{CommandBackend, CommandStep, CommandTemplates, ProcessRunner, ShellRunner};
pub use simulated::{FirewallOp, SimulatedFirewall};
