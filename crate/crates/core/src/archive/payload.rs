use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"KUQ1";
pub const HEADER_LEN: usize = 32;
pub const MAX_RANK: usize = 3;

/// Header (`"KUQ1"`, rank as `u32`, three `u64` extents with unused ones set
/// to 1) followed by the values as little-endian `f64` in row-major order.
pub fn encode(array: &ArrayD<f64>) -> Result<Vec<u8>> {
    let rank = array.ndim();
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::ShapeMismatch(format!(
            "payload rank must be 1..={MAX_RANK}, got {rank}"
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * array.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rank as u32).to_le_bytes());
    for d in 0..MAX_RANK {
        let extent = array.shape().get(d).copied().unwrap_or(1) as u64;
        out.extend_from_slice(&extent.to_le_bytes());
    }
    // iter() walks logical (row-major) order whatever the memory layout
    for v in array.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<ArrayD<f64>> {
    let bad = |reason: String| Error::MalformedPayload {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad(format!("bad magic {:?}", &bytes[..4])));
    }
    let rank = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(bad(format!("rank {rank} outside 1..={MAX_RANK}")));
    }
    let extents: Vec<u64> = (0..MAX_RANK)
        .map(|d| {
            let at = 8 + 8 * d;
            u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
        })
        .collect();
    if extents[rank..].iter().any(|e| *e != 1) {
        return Err(bad(format!("unused extents must be 1, got {extents:?}")));
    }
    let shape: Vec<usize> = extents[..rank].iter().map(|e| *e as usize).collect();
    let count = shape
        .iter()
        .try_fold(1usize, |acc, e| acc.checked_mul(*e))
        .ok_or_else(|| bad("extent product overflows".into()))?;
    let body = &bytes[HEADER_LEN..];
    if Some(body.len()) != count.checked_mul(8) {
        return Err(bad(format!(
            "payload has {} bytes, shape {shape:?} needs {}",
            body.len(),
            count.saturating_mul(8)
        )));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ArrayD::from_shape_vec(IxDyn(&shape), data).map_err(|e| bad(e.to_string()))
}
