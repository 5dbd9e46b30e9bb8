use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mac::MacAddr;

pub const MAX_IDENTIFIER_LEN: usize = 128;

/// Opaque node identifier carried as transaction provenance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, TxError> {
        let id = id.into();
        if id.is_empty() {
            return Err(TxError::EmptyIdentifier);
        }
        if id.chars().count() > MAX_IDENTIFIER_LEN {
            return Err(TxError::IdentifierTooLong(id.chars().count()));
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for NodeId {
    type Error = TxError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

/// Network access decision recorded on chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Allow,
    Deny,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Allow => "allow",
            Action::Deny => "deny",
        }
    }

    /// Maps the ingestion vocabulary onto the on-chain enum. Matching is
    /// case-insensitive.
    pub fn parse_alias(input: &str) -> Result<Self, TxError> {
        match input.trim().to_ascii_lowercase().as_str() {
            "allow" | "allowed" | "add" => Ok(Action::Allow),
            "deny" | "denied" | "remove" | "delete" => Ok(Action::Deny),
            _ => Err(TxError::InvalidAction(input.to_string())),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = TxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Action::parse_alias(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TxError {
    #[error("identifier must not be empty")]
    EmptyIdentifier,
    #[error("identifier is {0} characters, limit is {MAX_IDENTIFIER_LEN}")]
    IdentifierTooLong(usize),
    #[error(transparent)]
    InvalidMac(#[from] super::mac::InvalidMac),
    #[error("invalid action {0:?}, expected allow or deny")]
    InvalidAction(String),
}

/// A request to change one device's network access.
///
/// Field declaration order is the lexicographic key order used by the
/// canonical serialization; do not reorder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transaction {
    pub action: Action,
    pub mac: MacAddr,
    pub recipient: NodeId,
    pub sender: NodeId,
}

impl Transaction {
    pub fn new(sender: NodeId, recipient: NodeId, mac: MacAddr, action: Action) -> Self {
        Transaction { action, mac, recipient, sender }
    }
}

/// Validates and normalizes raw transaction fields.
pub fn new_transaction(
    sender: &str,
    recipient: &str,
    mac: &str,
    action: &str,
) -> Result<Transaction, TxError> {
    let sender = NodeId::new(sender)?;
    let recipient = NodeId::new(recipient)?;
    let mac = MacAddr::parse_lenient(mac)?;
    let action = Action::parse_alias(action)?;
    Ok(Transaction::new(sender, recipient, mac, action))
}
