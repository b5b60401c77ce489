//! Binary field snapshots.
//!
//! A single UTF-8 header line
//!
//! ```text
//! spfc-snapshot version=1 dim=2 n=256 L=100 time=9000 step=91000 scheme=bdf2-es-1 epsilon=0.5 A=0.015625 seed=1
//! ```
//!
//! followed by `n^dim` little-endian `f64` values in row-major order. Reals
//! use the shortest representation that parses back to the same value.

use std::fs;
use std::io;
use std::path::Path;

use spfc_core::{Field, Grid, Scheme};

pub const MAGIC: &str = "spfc-snapshot";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub time: f64,
    pub step: usize,
    pub scheme: Scheme,
    pub epsilon: f64,
    pub reg_a: f64,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot header: {0}")]
    Header(String),
    #[error("snapshot format version {found} is not supported (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

impl SnapshotMeta {
    fn header(&self) -> String {
        format!(
            "{MAGIC} version={FORMAT_VERSION} dim={} n={} L={} time={} step={} scheme={} epsilon={} A={} seed={}\n",
            self.dim,
            self.n,
            self.length,
            self.time,
            self.step,
            self.scheme.name(),
            self.epsilon,
            self.reg_a,
            self.seed
        )
    }

    fn parse(line: &str) -> Result<Self, SnapshotError> {
        let bad = |m: String| SnapshotError::Header(m);
        let mut tokens = line.split(' ');
        if tokens.next() != Some(MAGIC) {
            return Err(bad(format!("missing '{MAGIC}' tag")));
        }
        let pairs: Vec<(&str, &str)> = tokens
            .map(|t| {
                t.split_once('=')
                    .ok_or_else(|| bad(format!("token '{t}' is not key=value")))
            })
            .collect::<Result<_, _>>()?;
        let get = |key: &str| {
            pairs
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| bad(format!("missing key '{key}'")))
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, SnapshotError> {
            v.parse()
                .map_err(|_| SnapshotError::Header(format!("{key}: cannot parse '{v}'")))
        }
        let version: u32 = num("version", get("version")?)?;
        if version != FORMAT_VERSION {
            return Err(SnapshotError::VersionMismatch { found: version });
        }
        let meta = Self {
            dim: num("dim", get("dim")?)?,
            n: num("n", get("n")?)?,
            length: num("L", get("L")?)?,
            time: num("time", get("time")?)?,
            step: num("step", get("step")?)?,
            scheme: get("scheme")?
                .parse()
                .map_err(|_| bad("unknown scheme".into()))?,
            epsilon: num("epsilon", get("epsilon")?)?,
            reg_a: num("A", get("A")?)?,
            seed: num("seed", get("seed")?)?,
        };
        if !(meta.dim == 2 || meta.dim == 3) {
            return Err(SnapshotError::DimensionMismatch(format!(
                "dim = {} is not 2 or 3",
                meta.dim
            )));
        }
        Ok(meta)
    }

    fn points(&self) -> Option<usize> {
        self.n.checked_pow(self.dim as u32)
    }
}

pub fn encode_snapshot(field: &Field, meta: &SnapshotMeta) -> Result<Vec<u8>, SnapshotError> {
    let g = field.grid();
    if g.dim() != meta.dim || g.n_per_axis() != meta.n {
        return Err(SnapshotError::DimensionMismatch(format!(
            "field is {}D with n = {}, header says {}D with n = {}",
            g.dim(),
            g.n_per_axis(),
            meta.dim,
            meta.n
        )));
    }
    let header = meta.header();
    let mut out = Vec::with_capacity(header.len() + 8 * field.values().len());
    out.extend_from_slice(header.as_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(Field, SnapshotMeta), SnapshotError> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| SnapshotError::Header("no header line".into()))?;
    let line = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| SnapshotError::Header("header is not UTF-8".into()))?;
    let meta = SnapshotMeta::parse(line)?;
    let payload = &bytes[nl + 1..];
    let expected = meta
        .points()
        .and_then(|p| p.checked_mul(8))
        .ok_or_else(|| SnapshotError::DimensionMismatch("grid too large".into()))?;
    if payload.len() < expected {
        return Err(SnapshotError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(SnapshotError::DimensionMismatch(format!(
            "payload has {} bytes, {}D grid with n = {} needs {expected}",
            payload.len(),
            meta.dim,
            meta.n
        )));
    }
    let grid = Grid::new(meta.dim, meta.n, meta.length)
        .map_err(|e| SnapshotError::Header(e.to_string()))?;
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let field = Field::new(&grid, values).map_err(|e| SnapshotError::Header(e.to_string()))?;
    Ok((field, meta))
}

pub fn write_snapshot(
    field: &Field,
    meta: &SnapshotMeta,
    path: &Path,
) -> Result<(), SnapshotError> {
    fs::write(path, encode_snapshot(field, meta)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Field, SnapshotMeta), SnapshotError> {
    decode_snapshot(&fs::read(path)?)
}
