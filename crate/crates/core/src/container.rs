//! `.tprs` artifact format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "TPRS"
//! 4       2     format version (u16, currently 1)
//! 6       1     method: 1 = svd, 2 = tucker, 3 = svd per slice
//! 7       1     sample dtype: 1 = binary32, 2 = binary64
//! 8       1     order d
//! 9       4d    original shape, u32 each
//! 9+4d    4d    rank spec, u32 each (svd: [k, 0, ...])
//! 9+8d    8     payload byte length (u64)
//! 17+8d   ...   payload
//! ```
//!
//! All integers and samples are little-endian. Payload order: svd stores `u_k`
//! column-major, then `s_k`, then `vt_k` row-major; per-slice svd repeats that
//! block for every slice in row-major slice order; tucker stores the core
//! row-major followed by factors `1..d`, each column-major.

use crate::error::{Error, Result};
use crate::svd_codec::{reconstruct_svd, reconstruct_svd_slices, SlicedSvd, SvdFactors};
use crate::tensor::{DenseTensor, Matrix};
use crate::tucker::{reconstruct_tucker, TuckerFactors};

pub const MAGIC: [u8; 4] = *b"TPRS";
pub const FORMAT_VERSION: u16 = 1;
pub const FILE_EXTENSION: &str = "tprs";

/// Storage precision of payload samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    #[default]
    F32,
    F64,
}

impl Dtype {
    pub fn bytes(self) -> u64 {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn tag(self) -> u8 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            value => Err(Error::UnknownTag { field: "dtype", value }),
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" | "float32" | "binary32" => Ok(Dtype::F32),
            "f64" | "float64" | "binary64" => Ok(Dtype::F64),
            other => Err(Error::InvalidParameter(format!("unknown dtype {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Svd = 1,
    Tucker = 2,
    SvdSlices = 3,
}

impl MethodTag {
    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(MethodTag::Svd),
            2 => Ok(MethodTag::Tucker),
            3 => Ok(MethodTag::SvdSlices),
            value => Err(Error::UnknownTag { field: "method", value }),
        }
    }
}

/// Factor data carried by an artifact.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Svd(SvdFactors),
    Tucker(TuckerFactors),
    SvdSlices(SlicedSvd),
}

impl Payload {
    pub fn method(&self) -> MethodTag {
        match self {
            Payload::Svd(_) => MethodTag::Svd,
            Payload::Tucker(_) => MethodTag::Tucker,
            Payload::SvdSlices(_) => MethodTag::SvdSlices,
        }
    }

    pub fn original_shape(&self) -> Vec<usize> {
        match self {
            Payload::Svd(f) => vec![f.original_shape().0, f.original_shape().1],
            Payload::Tucker(f) => f.original_shape(),
            Payload::SvdSlices(f) => f.shape().to_vec(),
        }
    }

    /// Rank spec as stored in the header.
    pub fn rank_spec(&self) -> Vec<usize> {
        let d = self.original_shape().len();
        match self {
            Payload::Svd(f) => pad_rank(f.rank(), d),
            Payload::SvdSlices(f) => pad_rank(f.rank(), d),
            Payload::Tucker(f) => f.ranks(),
        }
    }

    pub fn reconstruct(&self) -> DenseTensor {
        match self {
            Payload::Svd(f) => reconstruct_svd(f).into(),
            Payload::Tucker(f) => reconstruct_tucker(f),
            Payload::SvdSlices(f) => reconstruct_svd_slices(f),
        }
    }
}

fn pad_rank(k: usize, d: usize) -> Vec<usize> {
    let mut spec = vec![0; d];
    spec[0] = k;
    spec
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub version: u16,
    pub method: MethodTag,
    pub dtype: Dtype,
    pub original_shape: Vec<usize>,
    pub rank_spec: Vec<usize>,
    pub payload_len: u64,
}

impl ArtifactHeader {
    pub fn encoded_len(&self) -> u64 {
        header_len(self.original_shape.len())
    }
}

pub fn header_len(order: usize) -> u64 {
    17 + 8 * order as u64
}

/// A decoded artifact: header plus factors at working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub header: ArtifactHeader,
    pub payload: Payload,
}

impl CompressedArtifact {
    pub fn encode(&self) -> Result<Vec<u8>> {
        encode(&self.payload, self.header.dtype)
    }
}

/// Number of payload samples implied by method, shape and ranks.
fn payload_samples(method: MethodTag, shape: &[usize], ranks: &[usize]) -> u64 {
    let d = shape.len();
    match method {
        MethodTag::Svd | MethodTag::SvdSlices => {
            let (m, n) = (shape[d - 2] as u64, shape[d - 1] as u64);
            let k = ranks[0] as u64;
            let slices: u64 = shape[..d - 2].iter().map(|&e| e as u64).product();
            slices * (m * k + k + k * n)
        }
        MethodTag::Tucker => {
            let core: u64 = ranks.iter().map(|&r| r as u64).product();
            let factors: u64 = shape.iter().zip(ranks).map(|(&i, &r)| (i * r) as u64).sum();
            core + factors
        }
    }
}

/// Length of `encode(payload, dtype)`, computed in closed form.
pub fn serialized_size(payload: &Payload, dtype: Dtype) -> u64 {
    let shape = payload.original_shape();
    header_len(shape.len()) + payload_samples(payload.method(), &shape, &payload.rank_spec()) * dtype.bytes()
}

struct Writer {
    buf: Vec<u8>,
    dtype: Dtype,
}

impl Writer {
    fn sample(&mut self, x: f64) {
        match self.dtype {
            Dtype::F32 => self.buf.extend_from_slice(&(x as f32).to_le_bytes()),
            Dtype::F64 => self.buf.extend_from_slice(&x.to_le_bytes()),
        }
    }

    fn column_major(&mut self, m: &Matrix) {
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                self.sample(m.get(i, j));
            }
        }
    }

    fn row_major(&mut self, data: &[f64]) {
        for &x in data {
            self.sample(x);
        }
    }

    fn svd(&mut self, f: &SvdFactors) {
        self.column_major(f.u());
        self.row_major(f.singular_values());
        self.row_major(f.vt().data());
    }
}

fn to_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::InvalidParameter(format!("{what} {value} does not fit in u32")))
}

pub fn encode(payload: &Payload, dtype: Dtype) -> Result<Vec<u8>> {
    let shape = payload.original_shape();
    let ranks = payload.rank_spec();
    let order = u8::try_from(shape.len()).map_err(|_| Error::InvalidParameter("order exceeds 255".into()))?;
    let payload_len = payload_samples(payload.method(), &shape, &ranks) * dtype.bytes();

    let mut w = Writer { buf: Vec::with_capacity((header_len(shape.len()) + payload_len) as usize), dtype };
    w.buf.extend_from_slice(&MAGIC);
    w.buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.buf.push(payload.method() as u8);
    w.buf.push(dtype.tag());
    w.buf.push(order);
    for &e in &shape {
        w.buf.extend_from_slice(&to_u32(e, "extent")?.to_le_bytes());
    }
    for &r in &ranks {
        w.buf.extend_from_slice(&to_u32(r, "rank")?.to_le_bytes());
    }
    w.buf.extend_from_slice(&payload_len.to_le_bytes());

    match payload {
        Payload::Svd(f) => w.svd(f),
        Payload::SvdSlices(f) => f.slices().iter().for_each(|s| w.svd(s)),
        Payload::Tucker(f) => {
            w.row_major(f.core().data());
            f.factors().iter().for_each(|u| w.column_major(u));
        }
    }
    debug_assert_eq!(w.buf.len() as u64, serialized_size(payload, dtype));
    Ok(w.buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    dtype: Dtype,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(Error::TruncatedPayload { needed: n as u64, available: available as u64 });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn samples(&mut self, n: usize) -> Result<Vec<f64>> {
        let width = self.dtype.bytes() as usize;
        let raw = self.take(n * width)?;
        let values: Vec<f64> = match self.dtype {
            Dtype::F32 => raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect(),
            Dtype::F64 => raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect(),
        };
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Inconsistent("payload contains non-finite samples".into()));
        }
        Ok(values)
    }

    fn column_major(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let data = self.samples(rows * cols)?;
        Ok(Matrix::from_fn(rows, cols, |i, j| data[j * rows + i]))
    }

    fn row_major(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        Matrix::new(rows, cols, self.samples(rows * cols)?)
    }

    fn svd(&mut self, m: usize, n: usize, k: usize) -> Result<SvdFactors> {
        let u = self.column_major(m, k)?;
        let s = self.samples(k)?;
        let vt = self.row_major(k, n)?;
        SvdFactors::new(u, s, vt)
    }
}

fn check_ranks(method: MethodTag, shape: &[usize], ranks: &[usize]) -> Result<()> {
    let d = shape.len();
    if shape.iter().any(|&e| e == 0) {
        return Err(Error::Inconsistent(format!("zero extent in shape {shape:?}")));
    }
    match method {
        MethodTag::Svd | MethodTag::SvdSlices => {
            let orders = if method == MethodTag::Svd { 2..=2 } else { 3..=4 };
            if !orders.contains(&d) {
                return Err(Error::Inconsistent(format!("order {d} is invalid for method {method:?}")));
            }
            let max = shape[d - 2].min(shape[d - 1]);
            if ranks[0] == 0 || ranks[0] > max || ranks[1..].iter().any(|&r| r != 0) {
                return Err(Error::Inconsistent(format!("rank spec {ranks:?} invalid for shape {shape:?}")));
            }
        }
        MethodTag::Tucker => {
            if ranks.iter().zip(shape).any(|(&r, &e)| r == 0 || r > e) {
                return Err(Error::Inconsistent(format!("rank spec {ranks:?} invalid for shape {shape:?}")));
            }
        }
    }
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<CompressedArtifact> {
    let prefix = &bytes[..bytes.len().min(4)];
    if prefix != &MAGIC[..prefix.len()] {
        return Err(Error::BadMagic { expected: MAGIC, found: prefix.to_vec() });
    }
    let mut r = Reader { bytes, pos: 0, dtype: Dtype::F64 };
    r.take(4)?;
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: version, supported: FORMAT_VERSION });
    }
    let method = MethodTag::from_tag(r.u8()?)?;
    let dtype = Dtype::from_tag(r.u8()?)?;
    let order = r.u8()? as usize;
    if order == 0 {
        return Err(Error::Inconsistent("order 0".into()));
    }
    let shape = (0..order).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let ranks = (0..order).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let payload_len = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));

    check_ranks(method, &shape, &ranks)?;
    let expected = payload_samples(method, &shape, &ranks) * dtype.bytes();
    if payload_len != expected {
        return Err(Error::Inconsistent(format!(
            "declared payload of {payload_len} bytes, shape and ranks imply {expected}"
        )));
    }
    let remaining = (bytes.len() - r.pos) as u64;
    if remaining < payload_len {
        return Err(Error::TruncatedPayload { needed: payload_len, available: remaining });
    }
    if remaining > payload_len {
        return Err(Error::TrailingBytes(remaining - payload_len));
    }

    r.dtype = dtype;
    let d = order;
    let payload = match method {
        MethodTag::Svd => Payload::Svd(r.svd(shape[0], shape[1], ranks[0])?),
        MethodTag::SvdSlices => {
            let count: usize = shape[..d - 2].iter().product();
            let slices = (0..count)
                .map(|_| r.svd(shape[d - 2], shape[d - 1], ranks[0]))
                .collect::<Result<Vec<_>>>()?;
            Payload::SvdSlices(SlicedSvd::new(shape.clone(), slices)?)
        }
        MethodTag::Tucker => {
            let core = DenseTensor::new(ranks.clone(), r.samples(ranks.iter().product())?)?;
            let factors = shape
                .iter()
                .zip(&ranks)
                .map(|(&i, &k)| r.column_major(i, k))
                .collect::<Result<Vec<_>>>()?;
            Payload::Tucker(TuckerFactors::new(core, factors)?)
        }
    };
    Ok(CompressedArtifact {
        header: ArtifactHeader { version, method, dtype, original_shape: shape, rank_spec: ranks, payload_len },
        payload,
    })
}
