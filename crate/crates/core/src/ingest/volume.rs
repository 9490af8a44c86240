//! Raw volume files: `"TVOL"`, version (u16), dtype (u8), order (u8),
//! `order × u32` extents, then row-major little-endian samples.

use std::fs;
use std::io::ErrorKind as IoErrorKind;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

pub const VOLUME_MAGIC: [u8; 4] = *b"TVOL";
pub const VOLUME_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeDtype {
    U8,
    U16,
    F32,
}

impl VolumeDtype {
    pub fn bytes(self) -> u64 {
        match self {
            VolumeDtype::U8 => 1,
            VolumeDtype::U16 => 2,
            VolumeDtype::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VolumeDtype::U8 => "u8",
            VolumeDtype::U16 => "u16",
            VolumeDtype::F32 => "f32",
        }
    }

    fn tag(self) -> u8 {
        match self {
            VolumeDtype::U8 => 1,
            VolumeDtype::U16 => 2,
            VolumeDtype::F32 => 3,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(VolumeDtype::U8),
            2 => Ok(VolumeDtype::U16),
            3 => Ok(VolumeDtype::F32),
            value => Err(Error::UnknownTag { field: "volume dtype", value }),
        }
    }
}

impl std::str::FromStr for VolumeDtype {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(VolumeDtype::U8),
            "u16" => Ok(VolumeDtype::U16),
            "f32" => Ok(VolumeDtype::F32),
            other => Err(Error::InvalidParameter(format!("unknown volume dtype {other:?}"))),
        }
    }
}

fn check_representable(t: &DenseTensor, dtype: VolumeDtype) -> Result<()> {
    let max = match dtype {
        VolumeDtype::U8 => u8::MAX as f64,
        VolumeDtype::U16 => u16::MAX as f64,
        VolumeDtype::F32 => f32::MAX as f64,
    };
    for (index, &value) in t.data().iter().enumerate() {
        let ok = match dtype {
            VolumeDtype::F32 => value.is_finite() && value.abs() <= max,
            _ => value.fract() == 0.0 && (0.0..=max).contains(&value),
        };
        if !ok {
            return Err(Error::Unrepresentable { value, index, dtype: dtype.name() });
        }
    }
    Ok(())
}

/// Rounds to the nearest integer and clamps into range for the integer sample
/// types; `F32` input is returned unchanged.
pub fn quantize(t: &DenseTensor, dtype: VolumeDtype) -> DenseTensor {
    let max = match dtype {
        VolumeDtype::U8 => u8::MAX as f64,
        VolumeDtype::U16 => u16::MAX as f64,
        VolumeDtype::F32 => return t.clone(),
    };
    let data = t.data().iter().map(|x| x.round().clamp(0.0, max)).collect();
    DenseTensor::new(t.shape().to_vec(), data).expect("same shape")
}

pub fn encode_volume(t: &DenseTensor, dtype: VolumeDtype) -> Result<Vec<u8>> {
    check_representable(t, dtype)?;
    let order = u8::try_from(t.order()).map_err(|_| Error::InvalidParameter("order exceeds 255".into()))?;
    let mut buf = Vec::with_capacity(8 + 4 * t.order() + t.len() * dtype.bytes() as usize);
    buf.extend_from_slice(&VOLUME_MAGIC);
    buf.extend_from_slice(&VOLUME_VERSION.to_le_bytes());
    buf.push(dtype.tag());
    buf.push(order);
    for &e in t.shape() {
        let e = u32::try_from(e).map_err(|_| Error::InvalidParameter(format!("extent {e} exceeds u32")))?;
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for &x in t.data() {
        match dtype {
            VolumeDtype::U8 => buf.push(x as u8),
            VolumeDtype::U16 => buf.extend_from_slice(&(x as u16).to_le_bytes()),
            VolumeDtype::F32 => buf.extend_from_slice(&(x as f32).to_le_bytes()),
        }
    }
    Ok(buf)
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let available = bytes.len() - *pos;
    if available < n {
        return Err(Error::TruncatedData { needed: n as u64, available: available as u64 });
    }
    let out = &bytes[*pos..*pos + n];
    *pos += n;
    Ok(out)
}

pub fn decode_volume(bytes: &[u8]) -> Result<(DenseTensor, VolumeDtype)> {
    let prefix = &bytes[..bytes.len().min(4)];
    if prefix != &VOLUME_MAGIC[..prefix.len()] {
        return Err(Error::BadMagic { expected: VOLUME_MAGIC, found: prefix.to_vec() });
    }
    let mut pos = 0;
    take(bytes, &mut pos, 4)?;
    let version = u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().expect("2 bytes"));
    if version != VOLUME_VERSION {
        return Err(Error::UnsupportedVersion { found: version, supported: VOLUME_VERSION });
    }
    let dtype = VolumeDtype::from_tag(take(bytes, &mut pos, 1)?[0])?;
    let order = take(bytes, &mut pos, 1)?[0] as usize;
    let shape = (0..order)
        .map(|_| Ok(u32::from_le_bytes(take(bytes, &mut pos, 4)?.try_into().expect("4 bytes")) as usize))
        .collect::<Result<Vec<_>>>()?;
    if order == 0 || shape.iter().any(|&e| e == 0) {
        return Err(Error::MalformedHeader(format!("invalid volume shape {shape:?}")));
    }
    let count = shape
        .iter()
        .try_fold(1u64, |acc, &e| acc.checked_mul(e as u64))
        .ok_or_else(|| Error::MalformedHeader("sample count overflows".into()))?;
    let needed = count
        .checked_mul(dtype.bytes())
        .ok_or_else(|| Error::MalformedHeader("sample count overflows".into()))?;
    let remaining = (bytes.len() - pos) as u64;
    if remaining < needed {
        return Err(Error::TruncatedData { needed, available: remaining });
    }
    if remaining > needed {
        return Err(Error::TrailingBytes(remaining - needed));
    }
    let raw = &bytes[pos..];
    let data: Vec<f64> = match dtype {
        VolumeDtype::U8 => raw.iter().map(|&b| b as f64).collect(),
        VolumeDtype::U16 => raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as f64).collect(),
        VolumeDtype::F32 => raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect(),
    };
    Ok((DenseTensor::new(shape, data)?, dtype))
}

/// Reads a whole file, reporting a missing path as [`Error::MissingFile`].
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        IoErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// Loads a volume along with its stored sample type.
pub fn read_volume(path: impl AsRef<Path>) -> Result<(DenseTensor, VolumeDtype)> {
    decode_volume(&read_bytes(path.as_ref())?)
}

pub fn load_volume(path: impl AsRef<Path>) -> Result<DenseTensor> {
    Ok(read_volume(path)?.0)
}

pub fn save_volume(t: &DenseTensor, path: impl AsRef<Path>, dtype: VolumeDtype) -> Result<()> {
    let bytes = encode_volume(t, dtype)?;
    fs::write(path, bytes)?;
    Ok(())
}
