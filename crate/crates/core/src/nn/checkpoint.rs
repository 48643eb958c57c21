//! Binary checkpoint: `u64` LE header length, JSON header, then the
//! parameters as little-endian `f64`.

use super::{Network, NetworkShape, NnError};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const FORMAT: &str = "lae-isac-network";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub label: String,
    pub seed: u64,
    pub step: u64,
    pub shape: NetworkShape,
    pub param_count: usize,
}

/// Run metadata stored alongside the parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckpointMeta {
    pub label: String,
    pub seed: u64,
    pub step: u64,
}

impl CheckpointMeta {
    pub fn new(label: &str, seed: u64, step: u64) -> Self {
        Self { label: label.into(), seed, step }
    }
}

pub fn write_checkpoint<W: Write>(mut w: W, net: &Network, meta: &CheckpointMeta) -> Result<(), NnError> {
    let header = CheckpointHeader {
        format: FORMAT.into(),
        version: VERSION,
        label: meta.label.clone(),
        seed: meta.seed,
        step: meta.step,
        shape: net.shape().clone(),
        param_count: net.params().len(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(8 * net.params().len());
    for p in net.params() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(CheckpointHeader, Network), NnError> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > 1 << 24 {
        return Err(NnError::Checkpoint(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    let header: CheckpointHeader = serde_json::from_slice(&json).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported format {} v{}", header.format, header.version)));
    }
    if header.param_count != header.shape.param_count() {
        return Err(NnError::Checkpoint(format!(
            "header declares {} parameters but the shape needs {}",
            header.param_count,
            header.shape.param_count()
        )));
    }
    let mut raw = vec![0u8; 8 * header.param_count];
    r.read_exact(&mut raw)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(NnError::Checkpoint("trailing bytes after parameters".into()));
    }
    let params = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let net = Network::from_params(header.shape.clone(), params)?;
    Ok((header, net))
}

pub fn save_checkpoint(path: &Path, net: &Network, meta: &CheckpointMeta) -> Result<(), NnError> {
    let f = std::fs::File::create(path)?;
    write_checkpoint(std::io::BufWriter::new(f), net, meta)
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, Network), NnError> {
    let f = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(f))
}
