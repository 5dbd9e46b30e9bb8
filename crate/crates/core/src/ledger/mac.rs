use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A 48-bit IEEE 802 hardware address in canonical form: six lowercase hex
/// octets joined by `:`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MacAddr([u8; 6]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid MAC address {0:?}")]
pub struct InvalidMac(pub String);

impl MacAddr {
    pub const fn new(octets: [u8; 6]) -> Self {
        MacAddr(octets)
    }

    pub fn octets(&self) -> [u8; 6] {
        self.0
    }

    /// Accepts `aa:bb:cc:dd:ee:ff`, `AA-BB-CC-DD-EE-FF`, `aabb.ccdd.eeff` and
    /// bare `aabbccddeeff`, in any letter case.
    pub fn parse_lenient(input: &str) -> Result<Self, InvalidMac> {
        let err = || InvalidMac(input.to_string());
        let trimmed = input.trim();
        let groups: Vec<&str> = if trimmed.contains(':') {
            trimmed.split(':').collect()
        } else if trimmed.contains('-') {
            trimmed.split('-').collect()
        } else if trimmed.contains('.') {
            trimmed.split('.').collect()
        } else {
            vec![trimmed]
        };
        let group_len = match groups.len() {
            6 => 2,
            3 => 4,
            1 => 12,
            _ => return Err(err()),
        };
        let mut hex = String::with_capacity(12);
        for group in &groups {
            if group.len() != group_len || !group.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(err());
            }
            hex.push_str(group);
        }
        let mut octets = [0u8; 6];
        hex::decode_to_slice(&hex, &mut octets).map_err(|_| err())?;
        Ok(MacAddr(octets))
    }

    /// Accepts only the canonical on-chain rendering.
    pub fn parse_canonical(input: &str) -> Result<Self, InvalidMac> {
        let mac = Self::parse_lenient(input)?;
        if mac.to_string() != input {
            return Err(InvalidMac(input.to_string()));
        }
        Ok(mac)
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl FromStr for MacAddr {
    type Err = InvalidMac;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_lenient(s)
    }
}

impl TryFrom<String> for MacAddr {
    type Error = InvalidMac;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse_canonical(&value)
    }
}

impl From<MacAddr> for String {
    fn from(mac: MacAddr) -> String {
        mac.to_string()
    }
}
