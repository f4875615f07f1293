use std::io::{Read, Write};

use ndarray::Array2;

use crate::engine::CellStateBuffer;
use crate::{Error, Real, Result};

pub const STATE_MAGIC: &[u8; 4] = b"MNCA";
pub const STATE_VERSION: u32 = 1;

/// Header then `N * C` little-endian f32 values, row-major.
pub fn encode_state_dump<T: Real>(states: &CellStateBuffer<T>) -> Vec<u8> {
    let (n, c) = states.values.dim();
    let mut out = Vec::with_capacity(16 + 4 * n * c);
    out.extend_from_slice(STATE_MAGIC);
    for v in [STATE_VERSION, n as u32, c as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in states.values.iter() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    out
}

pub fn decode_state_dump<T: Real>(bytes: &[u8]) -> Result<CellStateBuffer<T>> {
    if bytes.len() < 16 || &bytes[..4] != STATE_MAGIC {
        return Err(Error::Format("not a state dump".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != STATE_VERSION {
        return Err(Error::Format(format!("unsupported state dump version {version}")));
    }
    let (n, c) = (word(8) as usize, word(12) as usize);
    let body = &bytes[16..];
    if body.len() != 4 * n * c {
        return Err(Error::Format(format!("payload is {} bytes, header says {n}x{c}", body.len())));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| T::of(f32::from_le_bytes(b.try_into().unwrap()) as f64))
        .collect();
    Ok(CellStateBuffer {
        values: Array2::from_shape_vec((n, c), values).expect("length checked"),
        step_counter: 0,
    })
}

pub fn write_state_dump<T: Real>(mut w: impl Write, states: &CellStateBuffer<T>) -> Result<()> {
    w.write_all(&encode_state_dump(states))?;
    Ok(())
}

pub fn read_state_dump<T: Real>(mut r: impl Read) -> Result<CellStateBuffer<T>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_state_dump(&bytes)
}
