//! On-disk store for two-body tables.
//!
//! File `vten_s<s>_d<d>.bin`, little endian: magic `VTEN`, version `u32`,
//! `s` as `f64`, `d` as `u32`, entry count `u64`, the symmetry-unique entries
//! as `f64` in lexicographic quadruple order, then a CRC-32 of everything
//! before it.  A file for a larger basis with the same `s` serves any smaller
//! request by slicing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::tensor::{compute_tensor, TwoBodyTensor};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"VTEN";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 8;

pub const CACHE_ENV: &str = "PINSCAN_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct TensorCache {
    dir: PathBuf,
}

impl TensorCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".pinscan-cache"));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file_name(s: f64, d: usize) -> String {
        format!("vten_s{s}_d{d}.bin")
    }

    pub fn path_for(&self, s: f64, d: usize) -> PathBuf {
        self.dir.join(Self::file_name(s, d))
    }

    /// Cached basis sizes for this `s`, ascending.
    fn available(&self, s: f64) -> Vec<usize> {
        let prefix = format!("vten_s{s}_d");
        let mut out: Vec<usize> = fs::read_dir(&self.dir)
            .into_iter()
            .flatten()
            .flatten()
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix(&prefix)?.strip_suffix(".bin")?.parse().ok()
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Reads the smallest usable cached table; falls back to computing and
    /// storing a fresh one.  Corrupt files are ignored.
    pub fn load_or_build(&self, s: f64, d: usize) -> Result<TwoBodyTensor> {
        for size in self.available(s).into_iter().filter(|&size| size >= d) {
            if let Ok(t) = read_file(&self.path_for(s, size)) {
                if t.s().to_bits() == s.to_bits() {
                    return if size == d { Ok(t) } else { t.truncate(d) };
                }
            }
        }
        let t = compute_tensor(s, d)?;
        self.store(&t)?;
        Ok(t)
    }

    pub fn store(&self, t: &TwoBodyTensor) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(t.s(), t.d());
        let bytes = encode(t);
        let mut tmp = tempfile_in(&self.dir, &path)?;
        tmp.1.write_all(&bytes)?;
        tmp.1.sync_all()?;
        drop(tmp.1);
        fs::rename(&tmp.0, &path).map_err(|e| Error::Cache {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        Ok(path)
    }
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(PathBuf, fs::File)> {
    let stem = target.file_name().and_then(|n| n.to_str()).unwrap_or("vten");
    let tmp = dir.join(format!(".{stem}.{}.tmp", std::process::id()));
    let file = fs::File::create(&tmp)?;
    Ok((tmp, file))
}

pub(crate) fn encode(t: &TwoBodyTensor) -> Vec<u8> {
    let entries: Vec<f64> = t.unique_entries().map(|(_, v)| v).collect();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * entries.len() + 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&t.s().to_le_bytes());
    buf.extend_from_slice(&(t.d() as u32).to_le_bytes());
    buf.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for v in entries {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub(crate) fn decode(bytes: &[u8]) -> std::result::Result<TwoBodyTensor, String> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err("truncated header".into());
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err("checksum mismatch".into());
    }
    if &body[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let s = f64::from_le_bytes(body[8..16].try_into().unwrap());
    let d = u32_at(16) as usize;
    let count = u64::from_le_bytes(body[20..28].try_into().unwrap()) as usize;
    let expected = TwoBodyTensor::unique_quadruples(d).count();
    if count != expected || body.len() != HEADER_LEN + 8 * count {
        return Err("entry count does not match basis size".into());
    }
    let values = body[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok(TwoBodyTensor::from_unique_entries(
        s,
        d,
        TwoBodyTensor::unique_quadruples(d).zip(values),
    ))
}

fn read_file(path: &Path) -> Result<TwoBodyTensor> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|reason| Error::Cache {
        path: path.to_path_buf(),
        reason,
    })
}
