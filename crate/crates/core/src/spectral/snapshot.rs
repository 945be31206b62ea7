//! Binary field snapshots: a small little-endian header (magic `EPNS`,
//! version, d, n, field names, optional velocity box) followed by each field's
//! element count and its f64 values in row-major order. A JSON sidecar next
//! to the binary carries the same metadata plus the time stamp.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SpectralScalar, TorusGrid};

const MAGIC: &[u8; 4] = b"EPNS";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error("sidecar: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityHeader {
    pub v_max: f64,
    pub n_v: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub d: usize,
    pub n: usize,
    pub velocity: Option<VelocityHeader>,
    pub fields: Vec<(String, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: usize,
    pub n: usize,
    pub period: f64,
    pub velocity: Option<VelocityHeader>,
    pub fields: Vec<String>,
    pub t: f64,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

impl Snapshot {
    pub fn new(grid: &TorusGrid) -> Self {
        Self { d: grid.dim(), n: grid.n(), velocity: None, fields: Vec::new() }
    }

    pub fn with_scalar(mut self, name: &str, f: &SpectralScalar) -> Self {
        self.fields.push((name.to_string(), f.values().to_vec()));
        self
    }

    pub fn with_raw(mut self, name: &str, values: Vec<f64>) -> Self {
        self.fields.push((name.to_string(), values));
        self
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        for v in [VERSION, self.d as u32, self.n as u32, self.fields.len() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for (name, _) in &self.fields {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        match self.velocity {
            None => out.extend_from_slice(&0u32.to_le_bytes()),
            Some(vh) => {
                out.extend_from_slice(&1u32.to_le_bytes());
                out.extend_from_slice(&vh.v_max.to_le_bytes());
                out.extend_from_slice(&(vh.n_v as u32).to_le_bytes());
            }
        }
        for (_, data) in &self.fields {
            out.extend_from_slice(&(data.len() as u64).to_le_bytes());
            for x in data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(SnapshotError::Format(format!("unsupported version {version}")));
        }
        let d = read_u32(&mut r)? as usize;
        let n = read_u32(&mut r)? as usize;
        let count = read_u32(&mut r)? as usize;
        let mut names = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(&mut r)? as usize;
            if len > r.len() {
                return Err(SnapshotError::Format("truncated field name".into()));
            }
            let (name, rest) = r.split_at(len);
            names.push(String::from_utf8(name.to_vec()).map_err(|e| SnapshotError::Format(e.to_string()))?);
            r = rest;
        }
        let velocity = match read_u32(&mut r)? {
            0 => None,
            1 => {
                let v_max = read_f64(&mut r)?;
                let n_v = read_u32(&mut r)? as usize;
                Some(VelocityHeader { v_max, n_v })
            }
            other => return Err(SnapshotError::Format(format!("bad velocity flag {other}"))),
        };
        let mut fields = Vec::with_capacity(count);
        for name in names {
            let mut len = [0u8; 8];
            r.read_exact(&mut len)?;
            let len = u64::from_le_bytes(len) as usize;
            if len.checked_mul(8).is_none_or(|b| b > r.len()) {
                return Err(SnapshotError::Format(format!("truncated data for field {name}")));
            }
            let data = (0..len).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>, _>>()?;
            fields.push((name, data));
        }
        if !r.is_empty() {
            return Err(SnapshotError::Format("trailing bytes".into()));
        }
        Ok(Self { d, n, velocity, fields })
    }

    pub fn sidecar(&self, t: f64, attributes: BTreeMap<String, f64>) -> Sidecar {
        Sidecar {
            d: self.d,
            n: self.n,
            period: 2.0 * std::f64::consts::PI,
            velocity: self.velocity,
            fields: self.fields.iter().map(|(n, _)| n.clone()).collect(),
            t,
            attributes,
        }
    }

    /// Writes `path` and its JSON sidecar (`path` with extension `json`).
    pub fn write(&self, path: &Path, t: f64, attributes: BTreeMap<String, f64>) -> Result<(), SnapshotError> {
        fs::File::create(path)?.write_all(&self.to_bytes())?;
        let side = serde_json::to_string_pretty(&self.sidecar(t, attributes))?;
        fs::write(sidecar_path(path), side)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_bytes(&fs::read(path)?)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, SnapshotError> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?)
}

fn read_u32(r: &mut &[u8]) -> Result<u32, SnapshotError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut &[u8]) -> Result<f64, SnapshotError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_round_trip() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = SpectralScalar::from_fn(&g, |x, y| x.sin() + y);
        let mut s = Snapshot::new(&g).with_scalar("rho", &f).with_raw("f", vec![1.0, -2.5]);
        s.velocity = Some(VelocityHeader { v_max: 8.0, n_v: 16 });
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"EPNS");
        assert_eq!(Snapshot::from_bytes(&bytes).unwrap(), s);
    }

    #[test]
    fn rejects_corruption() {
        let g = TorusGrid::new(1, 8).unwrap();
        let s = Snapshot::new(&g).with_raw("a", vec![1.0; 8]);
        let mut bytes = s.to_bytes();
        bytes.truncate(bytes.len() - 3);
        assert!(Snapshot::from_bytes(&bytes).is_err());
        let mut bytes = s.to_bytes();
        bytes[0] = b'X';
        assert!(Snapshot::from_bytes(&bytes).is_err());
    }
}
