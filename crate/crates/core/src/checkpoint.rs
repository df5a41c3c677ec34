//! Versioned binary tensor dump shared by both models.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "FCKP" | u32 version | str kind
//! u32 n | n × (str key, str value)            header
//! u32 n | n × (str name, u32 m, m × str)      string lists
//! u32 n | n × (str name, u32 rank, rank × u64 dim, Π dim × f64)
//! 32-byte SHA-256 of everything before it
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8. Floats are stored as raw
//! IEEE-754 bits, so a save/load round trip is bit-exact.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{ArrayD, ArrayViewD, IxDyn};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::nn::ParamTensors;

const MAGIC: &[u8; 4] = b"FCKP";
pub const FORMAT_VERSION: u32 = 1;
const MAX_STR: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {found} (supported: {supported})")]
    Version { found: u32, supported: u32 },
    #[error("checkpoint truncated while reading {field}")]
    Truncated { field: String },
    #[error("checkpoint field {field} is corrupt: {reason}")]
    Corrupt { field: String, reason: String },
    #[error("checkpoint is a {found} model, expected {expected}")]
    Kind { expected: String, found: String },
    #[error("checkpoint is missing {field}")]
    Missing { field: String },
    #[error("dimension mismatch in {field}: expected {expected:?}, found {found:?}")]
    Dimension {
        field: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("checksum mismatch: file is corrupt")]
    Checksum,
}

impl CheckpointError {
    fn corrupt(field: &str, reason: impl Into<String>) -> Self {
        CheckpointError::Corrupt {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    header: BTreeMap<String, String>,
    lists: Vec<(String, Vec<String>)>,
    tensors: Vec<(String, ArrayD<f64>)>,
}

impl Checkpoint {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            header: BTreeMap::new(),
            lists: Vec::new(),
            tensors: Vec::new(),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.header.insert(key.into(), value.to_string());
    }

    pub fn push_list(&mut self, name: impl Into<String>, items: Vec<String>) {
        self.lists.push((name.into(), items));
    }

    pub fn push_tensor(&mut self, name: impl Into<String>, t: ArrayViewD<'_, f64>) {
        self.tensors.push((name.into(), t.to_owned()));
    }

    pub fn push_params<P: ParamTensors>(&mut self, prefix: &str, params: &P) {
        for (name, t) in params.tensors() {
            self.push_tensor(format!("{prefix}.{name}"), t);
        }
    }

    pub fn expect_kind(&self, kind: &str) -> Result<(), CheckpointError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(CheckpointError::Kind {
                expected: kind.to_string(),
                found: self.kind.clone(),
            })
        }
    }

    pub fn get(&self, key: &str) -> Result<&str, CheckpointError> {
        self.header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CheckpointError::Missing { field: key.to_string() })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, CheckpointError> {
        self.get(key)?
            .parse()
            .map_err(|_| CheckpointError::corrupt(key, "not an unsigned integer"))
    }

    pub fn list(&self, name: &str) -> Result<&[String], CheckpointError> {
        self.lists
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| l.as_slice())
            .ok_or_else(|| CheckpointError::Missing {
                field: name.to_string(),
            })
    }

    pub fn tensor(&self, name: &str) -> Result<&ArrayD<f64>, CheckpointError> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| CheckpointError::Missing {
                field: name.to_string(),
            })
    }

    /// Copies every tensor of `target` from the entry `prefix.<name>`,
    /// failing on missing entries or shape differences.
    pub fn fill_params<P: ParamTensors>(&self, prefix: &str, target: &mut P) -> Result<(), CheckpointError> {
        for (name, mut slot) in target.tensors_mut() {
            let field = format!("{prefix}.{name}");
            let stored = self.tensor(&field)?;
            if stored.shape() != slot.shape() {
                return Err(CheckpointError::Dimension {
                    field,
                    expected: slot.shape().to_vec(),
                    found: stored.shape().to_vec(),
                });
            }
            slot.assign(stored);
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.write_u32::<LittleEndian>(FORMAT_VERSION).unwrap();
        write_str(&mut buf, &self.kind);
        buf.write_u32::<LittleEndian>(self.header.len() as u32).unwrap();
        for (k, v) in &self.header {
            write_str(&mut buf, k);
            write_str(&mut buf, v);
        }
        buf.write_u32::<LittleEndian>(self.lists.len() as u32).unwrap();
        for (name, items) in &self.lists {
            write_str(&mut buf, name);
            buf.write_u32::<LittleEndian>(items.len() as u32).unwrap();
            for it in items {
                write_str(&mut buf, it);
            }
        }
        buf.write_u32::<LittleEndian>(self.tensors.len() as u32).unwrap();
        for (name, t) in &self.tensors {
            write_str(&mut buf, name);
            buf.write_u32::<LittleEndian>(t.ndim() as u32).unwrap();
            for d in t.shape() {
                buf.write_u64::<LittleEndian>(*d as u64).unwrap();
            }
            for v in t.iter() {
                buf.write_f64::<LittleEndian>(*v).unwrap();
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut r, "format version")?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::Version {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let kind = read_str(&mut r, "kind")?;
        let mut ck = Checkpoint::new(kind);

        let n = read_u32(&mut r, "header count")?;
        for _ in 0..n {
            let k = read_str(&mut r, "header key")?;
            let v = read_str(&mut r, &format!("header {k}"))?;
            ck.header.insert(k, v);
        }
        let n = read_u32(&mut r, "list count")?;
        for _ in 0..n {
            let name = read_str(&mut r, "list name")?;
            let m = read_u32(&mut r, &name)? as usize;
            let mut items = Vec::with_capacity(m.min(1 << 16));
            for _ in 0..m {
                items.push(read_str(&mut r, &name)?);
            }
            ck.lists.push((name, items));
        }
        let n = read_u32(&mut r, "tensor count")?;
        for _ in 0..n {
            let name = read_str(&mut r, "tensor name")?;
            let rank = read_u32(&mut r, &name)? as usize;
            if rank > 8 {
                return Err(CheckpointError::corrupt(&name, format!("rank {rank}")));
            }
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(read_u64(&mut r, &name)? as usize);
            }
            let len = shape
                .iter()
                .try_fold(1usize, |acc, d| acc.checked_mul(*d))
                .filter(|len| len.saturating_mul(8) <= r.len())
                .ok_or_else(|| CheckpointError::Truncated { field: name.clone() })?;
            let mut data = vec![0.0; len];
            r.read_f64_into::<LittleEndian>(&mut data)
                .map_err(|_| CheckpointError::Truncated { field: name.clone() })?;
            let t = ArrayD::from_shape_vec(IxDyn(&shape), data)
                .map_err(|e| CheckpointError::corrupt(&name, e.to_string()))?;
            ck.tensors.push((name, t));
        }
        let body_len = bytes.len() - r.len();
        let mut digest = [0u8; 32];
        read_exact(&mut r, &mut digest, "checksum")?;
        if !r.is_empty() {
            return Err(CheckpointError::corrupt("checksum", "trailing bytes"));
        }
        if Sha256::digest(&bytes[..body_len]).as_slice() != digest {
            return Err(CheckpointError::Checksum);
        }
        Ok(ck)
    }

    /// The [`file_digest`] this checkpoint would have once saved.
    pub fn content_id(&self) -> String {
        short_digest(&self.to_bytes())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Short content identifier: first 12 hex digits of the file's SHA-256.
pub fn file_digest(path: impl AsRef<Path>) -> std::io::Result<String> {
    Ok(short_digest(&std::fs::read(path)?))
}

fn short_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .take(6)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.write_u32::<LittleEndian>(s.len() as u32).unwrap();
    buf.extend_from_slice(s.as_bytes());
}

fn read_exact(r: &mut &[u8], out: &mut [u8], field: &str) -> Result<(), CheckpointError> {
    r.read_exact(out).map_err(|_| CheckpointError::Truncated {
        field: field.to_string(),
    })
}

fn read_u32(r: &mut &[u8], field: &str) -> Result<u32, CheckpointError> {
    r.read_u32::<LittleEndian>().map_err(|_| CheckpointError::Truncated {
        field: field.to_string(),
    })
}

fn read_u64(r: &mut &[u8], field: &str) -> Result<u64, CheckpointError> {
    r.read_u64::<LittleEndian>().map_err(|_| CheckpointError::Truncated {
        field: field.to_string(),
    })
}

fn read_str(r: &mut &[u8], field: &str) -> Result<String, CheckpointError> {
    let len = read_u32(r, field)? as usize;
    if len > MAX_STR || len > r.len() {
        return Err(CheckpointError::Truncated {
            field: field.to_string(),
        });
    }
    let mut bytes = vec![0u8; len];
    read_exact(r, &mut bytes, field)?;
    String::from_utf8(bytes).map_err(|_| CheckpointError::corrupt(field, "invalid UTF-8"))
}
