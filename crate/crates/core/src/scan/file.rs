//! Record files and checkpoints.
//!
//! Record file, little-endian: `PMRC`, version, `p`, `r`, `n`, degree,
//! shape id (one byte each), coefficient count (`u16`), record count
//! (`u64`), then per record one byte per coefficient and a `u16` of flags.
//!
//! Checkpoint: one line per shard,
//! `shard=<i> next=<index> hits=<count> config=<hex hash>`.

use std::fs;
use std::io;
use std::path::Path;

use super::{Record, ScanError, Shape};

pub const MAGIC: &[u8; 4] = b"PMRC";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 6 + 2 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordHeader {
    pub p: u8,
    pub r: u8,
    pub n: u8,
    pub deg: u8,
    pub shape: Shape,
    pub monomials: u16,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordFile {
    pub header: RecordHeader,
    pub records: Vec<Record>,
}

pub(crate) fn encode_record(r: &Record, out: &mut Vec<u8>) {
    out.extend_from_slice(&r.coeffs);
    out.extend_from_slice(&r.flags.to_le_bytes());
}

pub(crate) fn decode_record(bytes: &[u8], coeffs: usize) -> Result<Record, ScanError> {
    if bytes.len() != coeffs + 2 {
        return Err(ScanError::Format("truncated record".into()));
    }
    Ok(Record { coeffs: bytes[..coeffs].to_vec(), flags: u16::from_le_bytes([bytes[coeffs], bytes[coeffs + 1]]) })
}

impl RecordFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * (h.monomials as usize + 2));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[VERSION, h.p, h.r, h.n, h.deg, h.shape.id()]);
        out.extend_from_slice(&h.monomials.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            encode_record(r, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ScanError> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(ScanError::Format("not a record file".into()));
        }
        if bytes[4] != VERSION {
            return Err(ScanError::Format(format!("unsupported version {}", bytes[4])));
        }
        let shape = Shape::from_id(bytes[9]).ok_or_else(|| ScanError::Format(format!("unknown shape id {}", bytes[9])))?;
        let monomials = u16::from_le_bytes([bytes[10], bytes[11]]);
        let records = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let header = RecordHeader { p: bytes[5], r: bytes[6], n: bytes[7], deg: bytes[8], shape, monomials, records };
        let rec_len = monomials as usize + 2;
        let body = &bytes[HEADER_LEN..];
        if body.len() as u64 != records * rec_len as u64 {
            return Err(ScanError::Format(format!(
                "expected {records} records of {rec_len} bytes, found {} bytes",
                body.len()
            )));
        }
        let records = body.chunks(rec_len).map(|c| decode_record(c, monomials as usize)).collect::<Result<_, _>>()?;
        Ok(Self { header, records })
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, ScanError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub shard: usize,
    pub next: u64,
    pub hits: u64,
    pub config: String,
}

impl Checkpoint {
    pub fn parse(line: &str) -> Result<Self, ScanError> {
        let bad = || ScanError::Format(format!("bad checkpoint line `{line}`"));
        let mut fields = line.split_whitespace();
        let mut take = |key: &str| -> Result<String, ScanError> {
            let f = fields.next().ok_or_else(bad)?;
            f.strip_prefix(key).and_then(|v| v.strip_prefix('=')).map(str::to_string).ok_or_else(bad)
        };
        let shard = take("shard")?.parse().map_err(|_| bad())?;
        let next = take("next")?.parse().map_err(|_| bad())?;
        let hits = take("hits")?.parse().map_err(|_| bad())?;
        let config = take("config")?;
        if fields.next().is_some() || config.is_empty() || !config.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        Ok(Self { shard, next, hits, config })
    }

    pub fn line(&self) -> String {
        format!("shard={} next={} hits={} config={}", self.shard, self.next, self.hits, self.config)
    }

    pub fn write_all(path: &Path, all: &[Checkpoint]) -> io::Result<()> {
        let mut text = String::new();
        for c in all {
            text.push_str(&c.line());
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())
    }
}
