//! QGW1 weight archives.
//!
//! Layout, all integers little-endian `u32`:
//!
//! ```text
//! "QGW1" | tensor_count
//! per tensor: name_len | name (UTF-8) | rank | dims[rank] | payload (f32 LE, row-major)
//! ```

use std::collections::HashSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use super::StoreError;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"QGW1";

/// Serialize `tensors` into `out`. Values are rounded to the nearest `f32`.
pub fn encode_weights<W: Write>(mut out: W, tensors: &[Tensor]) -> Result<(), StoreError> {
    let mut seen = HashSet::new();
    for t in tensors {
        if t.name().is_empty() {
            return Err(StoreError::EmptyName);
        }
        if !seen.insert(t.name()) {
            return Err(StoreError::DuplicateName(t.name().to_string()));
        }
    }
    out.write_all(MAGIC)?;
    write_u32(&mut out, len_u32(tensors.len())?)?;
    for t in tensors {
        write_u32(&mut out, len_u32(t.name().len())?)?;
        out.write_all(t.name().as_bytes())?;
        write_u32(&mut out, len_u32(t.shape().len())?)?;
        for &d in t.shape() {
            write_u32(&mut out, len_u32(d)?)?;
        }
        let mut payload = Vec::with_capacity(4 * t.len());
        for &v in t.data() {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&payload)?;
    }
    Ok(())
}

/// Parse a complete QGW1 archive from `bytes`.
pub fn decode_weights(bytes: &[u8]) -> Result<Vec<Tensor>, StoreError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(StoreError::BadMagic);
    }
    let count = cur.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let name_len = cur.u32()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| StoreError::InvalidName)?
            .to_string();
        let rank = cur.u32()? as usize;
        let mut shape = Vec::with_capacity(rank.min(16));
        for _ in 0..rank {
            shape.push(cur.u32()? as usize);
        }
        let numel = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(StoreError::TruncatedFile)?;
        let payload = cur.take(numel.checked_mul(4).ok_or(StoreError::TruncatedFile)?)?;
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        tensors.push(Tensor::new(name, shape, data)?);
    }
    if cur.pos != bytes.len() {
        return Err(StoreError::TrailingBytes(bytes.len() - cur.pos));
    }
    Ok(tensors)
}

pub fn write_weights(path: impl AsRef<Path>, tensors: &[Tensor]) -> Result<(), StoreError> {
    let mut buf = Vec::new();
    encode_weights(&mut buf, tensors)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<Vec<Tensor>, StoreError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_weights(&bytes)
}

fn len_u32(n: usize) -> Result<u32, StoreError> {
    u32::try_from(n).map_err(|_| StoreError::TooLarge(n))
}

fn write_u32<W: Write>(out: &mut W, v: u32) -> io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self.pos.checked_add(n).ok_or(StoreError::TruncatedFile)?;
        let slice = self.bytes.get(self.pos..end).ok_or(StoreError::TruncatedFile)?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
