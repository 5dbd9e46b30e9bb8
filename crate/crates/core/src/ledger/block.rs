use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::transaction::Transaction;

/// Seconds since the Unix epoch at microsecond resolution.
///
/// Rendered on the wire as a JSON number with exactly six fractional digits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub const fn from_micros(micros: u64) -> Self {
        Timestamp(micros)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn now() -> Self {
        let since = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap_or_default();
        Timestamp(since.as_micros() as u64)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(self.to_string())
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(deserializer)?;
        if !secs.is_finite() || secs < 0.0 || secs > (u64::MAX / 1_000_000) as f64 {
            return Err(de::Error::custom(format!("timestamp out of range: {secs}")));
        }
        Ok(Timestamp((secs * 1e6).round() as u64))
    }
}

/// One link of the hash chain.
///
/// Field declaration order is the lexicographic key order used by the
/// canonical serialization; do not reorder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub index: u64,
    pub previous_hash: String,
    pub proof: u64,
    pub timestamp: Timestamp,
    pub transactions: Vec<Transaction>,
}

pub const GENESIS_PROOF: u64 = 100;
pub const GENESIS_PREVIOUS_HASH: &str = "1";

impl Block {
    /// The network-wide constant first block.
    pub fn genesis() -> Block {
        Block {
            index: 1,
            previous_hash: GENESIS_PREVIOUS_HASH.to_string(),
            proof: GENESIS_PROOF,
            timestamp: Timestamp::ZERO,
            transactions: Vec::new(),
        }
    }

    /// Single-line, sorted-key JSON with no insignificant whitespace.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("block serialization is infallible")
    }

    pub fn hash(&self) -> String {
        canonical_hash(self)
    }
}

/// Lowercase hex SHA-256 of the block's canonical JSON.
pub fn canonical_hash(block: &Block) -> String {
    hex::encode(Sha256::digest(block.canonical_json().as_bytes()))
}
