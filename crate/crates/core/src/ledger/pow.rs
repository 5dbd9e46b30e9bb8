use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Number of leading `'0'` hex characters a proof digest must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Difficulty(u8);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("difficulty must be between 1 and 16, got {0}")]
pub struct InvalidDifficulty(pub u64);

impl Difficulty {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 16;

    pub fn new(leading_zero_hex_digits: u8) -> Result<Self, InvalidDifficulty> {
        if (Self::MIN..=Self::MAX).contains(&leading_zero_hex_digits) {
            Ok(Difficulty(leading_zero_hex_digits))
        } else {
            Err(InvalidDifficulty(leading_zero_hex_digits as u64))
        }
    }

    pub fn leading_zero_hex_digits(self) -> u8 {
        self.0
    }

    /// Expected attempts for a fresh search, `16^d`.
    pub fn expected_attempts(self) -> f64 {
        16f64.powi(self.0 as i32)
    }
}

impl Default for Difficulty {
    fn default() -> Self {
        Difficulty(4)
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<u8> for Difficulty {
    type Error = InvalidDifficulty;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Difficulty::new(value)
    }
}

impl From<Difficulty> for u8 {
    fn from(d: Difficulty) -> u8 {
        d.0
    }
}

/// Result of a proof search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mined {
    pub proof: u64,
    /// Hash evaluations a sequential search from zero performs, `proof + 1`.
    pub attempts: u64,
}

fn digest_has_zero_prefix(digest: &[u8], nibbles: u8) -> bool {
    let full = (nibbles / 2) as usize;
    if digest[..full].iter().any(|&b| b != 0) {
        return false;
    }
    nibbles.is_multiple_of(2) || digest[full] >> 4 == 0
}

/// Reusable formatting buffer for the `"{last}{proof}"` preimage.
struct Preimage {
    buf: Vec<u8>,
    prefix_len: usize,
}

impl Preimage {
    fn new(last_proof: u64) -> Self {
        let mut buf = Vec::with_capacity(40);
        write!(buf, "{last_proof}").expect("write to Vec");
        let prefix_len = buf.len();
        Preimage { buf, prefix_len }
    }

    fn check(&mut self, proof: u64, difficulty: Difficulty) -> bool {
        self.buf.truncate(self.prefix_len);
        write!(self.buf, "{proof}").expect("write to Vec");
        digest_has_zero_prefix(&Sha256::digest(&self.buf), difficulty.0)
    }
}

/// True iff `sha256(ascii(last_proof) ++ ascii(proof))` in hex starts with
/// `difficulty` zeros.
pub fn valid_proof(last_proof: u64, proof: u64, difficulty: Difficulty) -> bool {
    Preimage::new(last_proof).check(proof, difficulty)
}

/// Smallest proof passing [`valid_proof`], searched one nonce at a time.
pub fn mine_proof_sequential(last_proof: u64, difficulty: Difficulty) -> Mined {
    let mut preimage = Preimage::new(last_proof);
    let mut proof = 0u64;
    while !preimage.check(proof, difficulty) {
        proof += 1;
    }
    Mined { proof, attempts: proof + 1 }
}

#[cfg(feature = "parallel")]
const PARALLEL_WINDOW: u64 = 1 << 14;

/// Smallest proof passing [`valid_proof`], searching fixed windows of nonces
/// across the rayon pool. Returns the same value as the sequential search.
#[cfg(feature = "parallel")]
pub fn mine_proof_parallel(last_proof: u64, difficulty: Difficulty) -> Mined {
    use rayon::prelude::*;

    let mut start = 0u64;
    loop {
        let found = (start..start + PARALLEL_WINDOW)
            .into_par_iter()
            .map_init(|| Preimage::new(last_proof), |pre, p| (p, pre.check(p, difficulty)))
            .find_first(|&(_, ok)| ok);
        if let Some((proof, _)) = found {
            return Mined { proof, attempts: proof + 1 };
        }
        start += PARALLEL_WINDOW;
    }
}

/// Issuer-side proof search: the smallest non-negative nonce that satisfies
/// the difficulty predicate against `last_proof`.
pub fn mine_proof(last_proof: u64, difficulty: Difficulty) -> Mined {
    #[cfg(feature = "parallel")]
    {
        // Low difficulties finish before the pool would warm up.
        if difficulty.0 >= 4 {
            return mine_proof_parallel(last_proof, difficulty);
        }
    }
    mine_proof_sequential(last_proof, difficulty)
}
