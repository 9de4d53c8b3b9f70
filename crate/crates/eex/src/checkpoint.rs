//! Checkpoints: one JSON header line, then every parameter as a
//! little-endian `f64` in canonical block order.

use std::collections::BTreeMap;
use std::path::Path;

use eex_core::linalg::{Matrix, Tensor3};
use eex_core::ModelParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{read_bytes, write, LoadError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub d: usize,
    pub filters: usize,
    pub filter_width: usize,
    pub margin: f64,
    pub relations: Vec<String>,
    pub seed: u64,
    pub epoch: usize,
}

impl Header {
    pub fn of(params: &ModelParams, epoch: usize) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            d: params.d,
            filters: params.filters,
            filter_width: params.width,
            margin: params.margin,
            relations: params.relations.keys().cloned().collect(),
            seed: params.seed,
            epoch,
        }
    }

    /// Number of reals the payload must hold.
    pub fn payload_len(&self) -> usize {
        let n = 2 * self.d;
        self.relations.len() * n * n + n * n * n + self.filters * self.filter_width * self.d + self.filters
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("missing header line")]
    MissingHeader,
    #[error("invalid header: {0}")]
    Header(String),
    #[error("unsupported format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("truncated payload: header declares {expected} values, found {found} bytes")]
    Truncated { expected: usize, found: usize },
    #[error("shape mismatch: header declares {expected} values, payload holds {found} bytes")]
    Shape { expected: usize, found: usize },
}

pub fn encode(params: &ModelParams, epoch: usize) -> Vec<u8> {
    let header = serde_json::to_string(&Header::of(params, epoch)).expect("header serializes");
    let mut out = Vec::with_capacity(header.len() + 1 + 8 * params.num_parameters());
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    for block in params.blocks() {
        for x in block {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(Header, ModelParams), CheckpointError> {
    let newline = bytes.iter().position(|&b| b == b'\n').ok_or(CheckpointError::MissingHeader)?;
    let header: Header =
        serde_json::from_slice(&bytes[..newline]).map_err(|e| CheckpointError::Header(e.to_string()))?;
    if header.format_version != FORMAT_VERSION {
        return Err(CheckpointError::Version { found: header.format_version });
    }
    let payload = &bytes[newline + 1..];
    let expected = header.payload_len();
    if payload.len() < expected * 8 {
        return Err(CheckpointError::Truncated { expected, found: payload.len() });
    }
    if payload.len() != expected * 8 {
        return Err(CheckpointError::Shape { expected, found: payload.len() });
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |len: usize| -> Vec<f64> { values.by_ref().take(len).collect() };

    let (d, f, w) = (header.d, header.filters, header.filter_width);
    let n = 2 * d;
    let mut relations = BTreeMap::new();
    for label in &header.relations {
        relations.insert(label.clone(), Matrix::from_vec(n, n, take(n * n)));
    }
    if relations.len() != header.relations.len() {
        return Err(CheckpointError::Header("duplicate relation label".into()));
    }
    let tensor = Tensor3::from_vec(n, take(n * n * n));
    let conv_w = Matrix::from_vec(f, w * d, take(f * w * d));
    let conv_b = take(f);
    let params = ModelParams {
        d,
        filters: f,
        width: w,
        margin: header.margin,
        seed: header.seed,
        relations,
        tensor,
        conv_w,
        conv_b,
    };
    Ok((header, params))
}

pub fn save(path: &Path, params: &ModelParams, epoch: usize) -> Result<(), CheckpointError> {
    Ok(write(path, encode(params, epoch))?)
}

pub fn load(path: &Path) -> Result<(Header, ModelParams), CheckpointError> {
    decode(&read_bytes(path)?)
}
