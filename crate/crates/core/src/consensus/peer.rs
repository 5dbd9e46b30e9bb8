use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use url::Url;

/// Normalized peer address: `scheme://host:port`, no path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PeerAddr(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("invalid peer address {0:?}")]
    InvalidAddress(String),
    #[error("refusing to register own address {0}")]
    SelfRegistration(PeerAddr),
    #[error("peer {0} is not registered")]
    NotFound(PeerAddr),
}

impl PeerAddr {
    /// Accepts `http(s)://host[:port][/]` or bare `host:port` (assumed http).
    pub fn parse(input: &str) -> Result<Self, RegistryError> {
        let invalid = || RegistryError::InvalidAddress(input.to_string());
        let trimmed = input.trim();
        if trimmed.is_empty() {
            return Err(invalid());
        }
        let with_scheme =
            if trimmed.contains("://") { trimmed.to_string() } else { format!("http://{trimmed}") };
        let url = Url::parse(&with_scheme).map_err(|_| invalid())?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(invalid());
        }
        if !url.username().is_empty() || url.password().is_some() {
            return Err(invalid());
        }
        if !matches!(url.path(), "" | "/") || url.query().is_some() || url.fragment().is_some() {
            return Err(invalid());
        }
        let host = url.host_str().filter(|h| !h.is_empty()).ok_or_else(invalid)?;
        let port = url.port_or_known_default().ok_or_else(invalid)?;
        Ok(PeerAddr(format!("{}://{}:{}", url.scheme(), host, port)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PeerAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PeerAddr {
    type Error = RegistryError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        PeerAddr::parse(&value)
    }
}

impl From<PeerAddr> for String {
    fn from(addr: PeerAddr) -> String {
        addr.0
    }
}

/// The permissioned peer set. Iteration is in lexicographic address order,
/// which is also the order peers are queried during resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeerRegistry {
    own: Option<PeerAddr>,
    peers: BTreeSet<PeerAddr>,
}

impl PeerRegistry {
    pub fn new(own: Option<PeerAddr>) -> Self {
        PeerRegistry { own, peers: BTreeSet::new() }
    }

    pub fn own_address(&self) -> Option<&PeerAddr> {
        self.own.as_ref()
    }

    /// Returns whether the address was newly added.
    pub fn register(&mut self, addr: PeerAddr) -> Result<bool, RegistryError> {
        if self.own.as_ref() == Some(&addr) {
            return Err(RegistryError::SelfRegistration(addr));
        }
        Ok(self.peers.insert(addr))
    }

    pub fn register_str(&mut self, addr: &str) -> Result<bool, RegistryError> {
        self.register(PeerAddr::parse(addr)?)
    }

    /// Removing an unknown peer reports `NotFound` and leaves the set as is.
    pub fn remove(&mut self, addr: &PeerAddr) -> Result<(), RegistryError> {
        if self.peers.remove(addr) {
            Ok(())
        } else {
            Err(RegistryError::NotFound(addr.clone()))
        }
    }

    pub fn contains(&self, addr: &PeerAddr) -> bool {
        self.peers.contains(addr)
    }

    pub fn len(&self) -> usize {
        self.peers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PeerAddr> {
        self.peers.iter()
    }
}
