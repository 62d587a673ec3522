//! Versioned binary checkpoints: parameters plus optimizer state.
//!
//! Layout (little-endian): 8-byte magic, format version, embedding width,
//! feature width, then the seven parameter blocks as raw f64 in
//! declaration order, then an optional Adam section (step counter and both
//! moment vectors). Raw f64 bit patterns make round-trips bit-exact.

use std::io::{Read, Write};
use std::path::Path;

use super::{AdamState, EmbeddingParams, NetError, FEATURE_DIM};

const MAGIC: &[u8; 8] = b"TSPMCNV1";
const VERSION: u32 = 1;

/// Parameters plus optional optimizer state, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: EmbeddingParams,
    pub adam: Option<AdamState>,
}

fn put_u32(w: &mut impl Write, x: u32) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_u64(w: &mut impl Write, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_f64s(w: &mut impl Write, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn get_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn get_f64s(r: &mut impl Read, out: &mut [f64]) -> std::io::Result<()> {
    let mut buf = [0u8; 8];
    for o in out {
        r.read_exact(&mut buf)?;
        *o = f64::from_le_bytes(buf);
    }
    Ok(())
}

/// Serialize a checkpoint to any writer.
pub fn write_checkpoint(
    w: &mut impl Write,
    params: &EmbeddingParams,
    adam: Option<&AdamState>,
) -> Result<(), NetError> {
    w.write_all(MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, params.dim() as u32)?;
    put_u32(w, FEATURE_DIM as u32)?;
    for block in params.blocks() {
        put_f64s(w, block)?;
    }
    match adam {
        Some(state) => {
            w.write_all(&[1u8])?;
            put_u64(w, state.step)?;
            put_f64s(w, &state.m)?;
            put_f64s(w, &state.v)?;
        }
        None => w.write_all(&[0u8])?,
    }
    Ok(())
}

/// Deserialize a checkpoint from any reader.
pub fn read_checkpoint(r: &mut impl Read) -> Result<Checkpoint, NetError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NetError::Format("bad magic bytes".into()));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(NetError::Format(format!("unknown version {version}")));
    }
    let dim = get_u32(r)? as usize;
    let feat = get_u32(r)? as usize;
    if feat != FEATURE_DIM {
        return Err(NetError::Format(format!(
            "feature width {feat} does not match {FEATURE_DIM}"
        )));
    }
    if dim == 0 || dim > 1 << 16 {
        return Err(NetError::Format(format!("implausible width {dim}")));
    }
    let mut params = EmbeddingParams::zeros(dim);
    for block in params.blocks_mut() {
        get_f64s(r, block)?;
    }
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let adam = match flag[0] {
        0 => None,
        1 => {
            let step = get_u64(r)?;
            let mut state = AdamState::new(params.flat_len());
            state.step = step;
            get_f64s(r, &mut state.m)?;
            get_f64s(r, &mut state.v)?;
            Some(state)
        }
        other => return Err(NetError::Format(format!("bad adam flag {other}"))),
    };
    if !params.is_finite() {
        return Err(NetError::Format("non-finite parameter".into()));
    }
    Ok(Checkpoint { params, adam })
}

pub fn save_checkpoint(
    path: &Path,
    params: &EmbeddingParams,
    adam: Option<&AdamState>,
) -> Result<(), NetError> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, params, adam)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NetError> {
    let data = std::fs::read(path)?;
    read_checkpoint(&mut data.as_slice())
}
