//! Append-only chain log: one canonical block JSON per line, genesis first.
//!
//! Appends are fsynced one line at a time. Adopting a peer chain rewrites the
//! whole file through a temp file and rename. On open, the longest valid
//! prefix of complete lines is kept and anything after it is cut off.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::consensus::accept_block;
use crate::ledger::{valid_chain, Block, Chain, Difficulty};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("chain log {path} is unrecoverable: {reason}")]
    Unrecoverable { path: PathBuf, reason: String },
}

/// Outcome of reading the log at startup.
#[derive(Debug, Clone)]
pub struct Restored {
    pub chain: Chain,
    /// Complete lines discarded because they failed to parse or validate.
    pub dropped_lines: usize,
    /// Bytes cut from the end of the file, including any torn final line.
    pub dropped_bytes: u64,
}

#[derive(Debug)]
pub struct ChainLog {
    path: PathBuf,
    file: File,
}

fn line_for(block: &Block) -> String {
    let mut line = block.canonical_json();
    line.push('\n');
    line
}

impl ChainLog {
    /// Opens or creates the log and restores the longest valid prefix.
    pub fn open(path: impl AsRef<Path>, difficulty: Difficulty) -> Result<(ChainLog, Restored), StoreError> {
        let path = path.as_ref().to_path_buf();
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };

        let mut chain: Option<Chain> = None;
        let mut kept = 0usize;
        let mut dropped_lines = 0usize;
        let mut offset = 0usize;
        while let Some(rel) = bytes[offset..].iter().position(|&b| b == b'\n') {
            let line = &bytes[offset..offset + rel];
            let block = serde_json::from_slice::<Block>(line).ok();
            match (&mut chain, block) {
                (None, Some(block)) if block == Block::genesis() => chain = Some(Chain::genesis()),
                (None, _) => {
                    return Err(StoreError::Unrecoverable {
                        path,
                        reason: "first line is not the genesis block".into(),
                    })
                }
                (Some(current), Some(block)) => {
                    if let Err(e) = accept_block(current, block, difficulty) {
                        tracing::warn!(path = %path.display(), error = %e, "chain log line rejected");
                        dropped_lines = bytes[offset..].iter().filter(|&&b| b == b'\n').count();
                        break;
                    }
                }
                (Some(_), None) => {
                    dropped_lines = bytes[offset..].iter().filter(|&&b| b == b'\n').count();
                    break;
                }
            }
            offset += rel + 1;
            kept = offset;
        }

        let dropped_bytes = (bytes.len() - kept) as u64;
        let fresh = chain.is_none();
        let chain = chain.unwrap_or_else(Chain::genesis);
        debug_assert!(valid_chain(chain.blocks(), difficulty));

        let mut log = if fresh {
            ChainLog::rewrite_at(&path, &chain)?
        } else {
            let file = OpenOptions::new().read(true).write(true).open(&path)?;
            if dropped_bytes > 0 {
                tracing::warn!(
                    path = %path.display(),
                    dropped_bytes,
                    dropped_lines,
                    restored_length = chain.len(),
                    "truncating chain log to last valid prefix"
                );
                file.set_len(kept as u64)?;
                file.sync_all()?;
            }
            ChainLog { path, file }
        };
        log.reopen_append()?;
        Ok((log, Restored { chain, dropped_lines, dropped_bytes }))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and fsyncs one block line.
    pub fn append(&mut self, block: &Block) -> io::Result<()> {
        self.file.write_all(line_for(block).as_bytes())?;
        self.file.sync_data()
    }

    /// Atomically replaces the log with `chain`.
    pub fn rewrite(&mut self, chain: &Chain) -> io::Result<()> {
        *self = ChainLog::rewrite_at(&self.path, chain)?;
        self.reopen_append()
    }

    fn rewrite_at(path: &Path, chain: &Chain) -> io::Result<ChainLog> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = dir.join(tmp_name);
        {
            let mut out = io::BufWriter::new(File::create(&tmp)?);
            for block in chain.blocks() {
                out.write_all(line_for(block).as_bytes())?;
            }
            out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        if let Ok(d) = File::open(dir) {
            // Directory fsync is unsupported on some platforms.
            let _ = d.sync_all();
        }
        let file = OpenOptions::new().read(true).write(true).open(path)?;
        Ok(ChainLog { path: path.to_path_buf(), file })
    }

    fn reopen_append(&mut self) -> io::Result<()> {
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{forge_block, new_transaction, Timestamp};

    fn d1() -> Difficulty {
        Difficulty::new(1).unwrap()
    }

    fn forge_onto(chain: &mut Chain, n: u8) -> Block {
        let tx = new_transaction("a", "b", &format!("02:00:00:00:00:{n:02x}"), "allow").unwrap();
        let block = forge_block(chain, &[tx], d1(), Timestamp::from_micros(n as u64)).unwrap().block;
        accept_block(chain, block.clone(), d1()).unwrap();
        block
    }

    #[test]
    fn missing_file_starts_fresh() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        let (_log, restored) = ChainLog::open(&path, d1()).unwrap();
        assert_eq!(restored.chain, Chain::genesis());
        assert_eq!(fs::read_to_string(&path).unwrap(), line_for(&Block::genesis()));
    }

    #[test]
    fn empty_file_starts_fresh() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        File::create(&path).unwrap();
        let (_log, restored) = ChainLog::open(&path, d1()).unwrap();
        assert_eq!(restored.chain.len(), 1);
    }

    #[test]
    fn restart_restores_appended_blocks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        let (mut log, restored) = ChainLog::open(&path, d1()).unwrap();
        let mut chain = restored.chain;
        for n in 0..2 {
            let block = forge_onto(&mut chain, n);
            log.append(&block).unwrap();
        }
        drop(log);
        let (_log, restored) = ChainLog::open(&path, d1()).unwrap();
        assert_eq!(restored.chain.len(), 3);
        assert_eq!(restored.chain.tip().hash(), chain.tip().hash());
    }

    #[test]
    fn torn_last_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        let (mut log, restored) = ChainLog::open(&path, d1()).unwrap();
        let mut chain = restored.chain;
        for n in 0..2 {
            let block = forge_onto(&mut chain, n);
            log.append(&block).unwrap();
        }
        drop(log);
        let len = fs::metadata(&path).unwrap().len();
        OpenOptions::new().write(true).open(&path).unwrap().set_len(len - 10).unwrap();
        let (mut log, restored) = ChainLog::open(&path, d1()).unwrap();
        assert_eq!(restored.chain.len(), 2);
        assert!(restored.dropped_bytes > 0);
        // Appending after repair yields a clean log.
        let mut chain = restored.chain;
        let block = forge_onto(&mut chain, 9);
        log.append(&block).unwrap();
        drop(log);
        assert_eq!(ChainLog::open(&path, d1()).unwrap().1.chain, chain);
    }

    #[test]
    fn invalid_middle_line_truncates_rest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        let mut chain = Chain::genesis();
        let b2 = forge_onto(&mut chain, 1);
        let b3 = forge_onto(&mut chain, 2);
        let mut forged = b2.clone();
        forged.timestamp = Timestamp::from_micros(999);
        // Retimed block 2 still links to genesis, but block 3 no longer
        // links to it.
        let text = [Block::genesis(), forged.clone(), b3].iter().map(line_for).collect::<String>();
        fs::write(&path, text).unwrap();
        let (_log, restored) = ChainLog::open(&path, d1()).unwrap();
        assert_eq!(restored.chain.len(), 2);
        assert_eq!(restored.dropped_lines, 1);
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            [Block::genesis(), forged].iter().map(line_for).collect::<String>()
        );
    }

    #[test]
    fn foreign_first_line_is_unrecoverable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        fs::write(&path, "{\"not\":\"a block\"}\n").unwrap();
        assert!(matches!(ChainLog::open(&path, d1()), Err(StoreError::Unrecoverable { .. })));
    }

    #[test]
    fn rewrite_replaces_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.log");
        let (mut log, _) = ChainLog::open(&path, d1()).unwrap();
        let mut chain = Chain::genesis();
        for n in 0..3 {
            forge_onto(&mut chain, n);
        }
        log.rewrite(&chain).unwrap();
        let extra = forge_onto(&mut chain, 7);
        log.append(&extra).unwrap();
        drop(log);
        assert!(!dir.path().join("chain.log.tmp").exists());
        assert_eq!(ChainLog::open(&path, d1()).unwrap().1.chain, chain);
    }
}
