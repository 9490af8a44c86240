//! Inputs: raw `.tvol` volumes, binary PGM images and synthetic phantoms.

mod phantom;
mod pgm;
mod volume;

pub use phantom::{generate_phantom, Blob, PhantomSpec};
pub use pgm::{load_pgm, parse_pgm};
pub use volume::{
    decode_volume, encode_volume, load_volume, quantize, read_bytes, read_volume, save_volume, VolumeDtype, VOLUME_MAGIC,
    VOLUME_VERSION,
};

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// A tensor read from disk, with the raw size of its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInput {
    pub tensor: DenseTensor,
    /// Sample count times stored sample width; headers are not counted.
    pub original_bytes: u64,
}

/// Reads a `.tvol` volume or a binary PGM, chosen by the file's magic bytes.
pub fn load_input(path: impl AsRef<Path>) -> Result<LoadedInput> {
    let bytes = volume::read_bytes(path.as_ref())?;
    let (tensor, width) = if bytes.starts_with(&VOLUME_MAGIC) {
        let (t, dtype) = decode_volume(&bytes)?;
        (t, dtype.bytes())
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        let (m, width) = pgm::parse_with_depth(&bytes)?;
        (DenseTensor::from(m), width)
    } else {
        return Err(Error::UnsupportedFormat(format!(
            "{}: neither a TVOL volume nor a binary PGM",
            path.as_ref().display()
        )));
    };
    let original_bytes = tensor.len() as u64 * width;
    Ok(LoadedInput { tensor, original_bytes })
}
