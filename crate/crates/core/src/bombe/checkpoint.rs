//! Resumable search state.
//!
//! Layout, all integers little-endian:
//! `b"BNBCKPT1"`, 32-byte run fingerprint, `u8` alphabet size, `u32` unit
//! count, then per unit `u32` index, `u32` candidate count and per candidate
//! three start letters, `u8` schedule tag (0 none, 1 middle, 2 middle and
//! left), `u32` step index, `u32` survivor count and `n` bytes per survivor
//! (`0xFF` for an open letter).

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{BombeOptions, Crib, StepSchedule, SteckerHypothesis, UnitResult};
use crate::alphabet::{Alphabet, Letter};
use crate::enigma::ROTORS;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"BNBCKPT1";

#[derive(Clone, Debug, Default)]
pub struct Checkpoint {
    pub fingerprint: [u8; 32],
    pub(crate) done: BTreeMap<usize, UnitResult>,
}

pub(crate) fn fingerprint(crib: &Crib, orders: &[[String; ROTORS]], options: &BombeOptions, alphabet: &Alphabet) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(crib.to_text(alphabet));
    for o in orders {
        h.update(o.join("/"));
        h.update(b";");
    }
    h.update(format!("{}|{:?}|{}", options.diagonal, options.schedules, options.reflector));
    h.finalize().into()
}

impl Checkpoint {
    pub fn new(fingerprint: [u8; 32]) -> Self {
        Self {
            fingerprint,
            done: BTreeMap::new(),
        }
    }

    pub fn units_done(&self) -> usize {
        self.done.len()
    }

    pub fn to_bytes(&self, n: usize) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.fingerprint);
        out.push(n as u8);
        out.extend_from_slice(&(self.done.len() as u32).to_le_bytes());
        for (&u, results) in &self.done {
            out.extend_from_slice(&(u as u32).to_le_bytes());
            out.extend_from_slice(&(results.len() as u32).to_le_bytes());
            for ((start, schedule), survivors) in results {
                out.extend_from_slice(start);
                let (tag, k) = match *schedule {
                    StepSchedule::None => (0u8, 0usize),
                    StepSchedule::MiddleAt { k, left: false } => (1, k),
                    StepSchedule::MiddleAt { k, left: true } => (2, k),
                };
                out.push(tag);
                out.extend_from_slice(&(k as u32).to_le_bytes());
                out.extend_from_slice(&(survivors.len() as u32).to_le_bytes());
                for s in survivors {
                    out.extend_from_slice(&s.raw());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], fingerprint: [u8; 32], n: usize) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        if r.take(32)? != fingerprint {
            return Err(Error::Checkpoint("written by a different search".into()));
        }
        if r.take(1)?[0] as usize != n {
            return Err(Error::Checkpoint("alphabet size differs".into()));
        }
        let units = r.u32()?;
        let mut done = BTreeMap::new();
        for _ in 0..units {
            let u = r.u32()? as usize;
            let count = r.u32()?;
            let mut results = Vec::new();
            for _ in 0..count {
                let s = r.take(ROTORS)?;
                let start: [Letter; ROTORS] = [s[0], s[1], s[2]];
                let tag = r.take(1)?[0];
                let k = r.u32()? as usize;
                let schedule = match tag {
                    0 => StepSchedule::None,
                    1 => StepSchedule::MiddleAt { k, left: false },
                    2 => StepSchedule::MiddleAt { k, left: true },
                    t => return Err(Error::Checkpoint(format!("bad schedule tag {t}"))),
                };
                let m = r.u32()?;
                let mut survivors = Vec::new();
                for _ in 0..m {
                    survivors.push(SteckerHypothesis::from_raw_checked(r.take(n)?));
                }
                results.push(((start, schedule), survivors));
            }
            done.insert(u, results);
        }
        if r.at != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self { fingerprint, done })
    }

    pub fn load(path: &Path, fingerprint: [u8; 32], n: usize) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes, fingerprint, n)
    }

    /// Writes beside `path` and renames over it.
    pub fn save(&self, path: &Path, n: usize) -> Result<()> {
        let io = |e: std::io::Error| Error::Checkpoint(format!("{}: {e}", path.display()));
        let tmp = path.with_extension("tmp");
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(&self.to_bytes(n)).map_err(io)?;
        f.sync_all().map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.at + k;
        if end > self.bytes.len() {
            return Err(Error::Checkpoint("truncated".into()));
        }
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
