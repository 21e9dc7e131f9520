//! Network checkpoint files.
//!
//! Byte layout (all integers little-endian, parameters 64-bit IEEE floats in
//! the flat layer-major order documented in [`crate::nn`]):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "SOLNET01"
//! 8       1     endianness tag: 0x01 = little-endian (only value written)
//! 9       4     depth L      (u32)
//! 13      4     width m      (u32)
//! 17      4     input dim d  (u32)
//! 21      8     parameter count (u64)
//! 29      8*n   parameters   (f64, little-endian)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::nn::SolutionNetwork;
use crate::scalar::{cast, Scalar};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"SOLNET01";
const LITTLE_ENDIAN_TAG: u8 = 0x01;

/// Writes a checkpoint. Parameters are stored as `f64` regardless of the
/// working precision.
pub fn save_network<F: Scalar>(path: impl AsRef<Path>, net: &SolutionNetwork<F>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[LITTLE_ENDIAN_TAG])?;
    w.write_all(&(net.depth() as u32).to_le_bytes())?;
    w.write_all(&(net.width() as u32).to_le_bytes())?;
    w.write_all(&(net.input_dim() as u32).to_le_bytes())?;
    w.write_all(&(net.param_count() as u64).to_le_bytes())?;
    for p in net.params() {
        let v = p.to_f64().ok_or_else(|| Error::Checkpoint("parameter not representable".into()))?;
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a checkpoint written by [`save_network`].
pub fn load_network<F: Scalar>(path: impl AsRef<Path>) -> Result<SolutionNetwork<F>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic; not a network checkpoint".into()));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    if tag[0] != LITTLE_ENDIAN_TAG {
        return Err(Error::Checkpoint(format!("unsupported endianness tag {:#x}", tag[0])));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let depth = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let width = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let input_dim = u32::from_le_bytes(u32buf) as usize;
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let count = u64::from_le_bytes(u64buf) as usize;
    if depth == 0 || width == 0 || input_dim == 0 {
        return Err(Error::Checkpoint("architecture fields must be positive".into()));
    }
    let expected = SolutionNetwork::<F>::count_params(input_dim, width, depth);
    if count != expected {
        return Err(Error::Checkpoint(format!(
            "parameter count {count} does not match architecture ({input_dim}, {width}, {depth}): expected {expected}"
        )));
    }
    let mut params = Vec::with_capacity(count);
    let mut f64buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut f64buf)?;
        params.push(cast::<F>(f64::from_le_bytes(f64buf)));
    }
    SolutionNetwork::from_params(input_dim, width, depth, params)
}
