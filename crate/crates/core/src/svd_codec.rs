//! Truncated-SVD codec: decompose, keep the top `k` singular triples, reconstruct.
//!
//! Volumes (order 3 or 4) are handled as a stack of independent 2-D slices over
//! the last two modes, each truncated to the same `k`.

use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::tensor::{DenseTensor, Matrix};

/// Leading-`k` truncation `u_k · diag(s_k) · vt_k` of an `M × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    u_k: Matrix,
    s_k: Vec<f64>,
    vt_k: Matrix,
}

impl SvdFactors {
    /// Assembles factors, checking that their shapes agree.
    pub fn new(u_k: Matrix, s_k: Vec<f64>, vt_k: Matrix) -> Result<Self> {
        let k = s_k.len();
        if k == 0 {
            return Err(Error::RankOutOfRange { mode: 0, rank: 0, max: u_k.rows().min(vt_k.cols()) });
        }
        if u_k.cols() != k || vt_k.rows() != k {
            return Err(Error::ShapeMismatch(format!(
                "u_k is {}x{}, s_k has {} values, vt_k is {}x{}",
                u_k.rows(),
                u_k.cols(),
                k,
                vt_k.rows(),
                vt_k.cols()
            )));
        }
        if k > u_k.rows().min(vt_k.cols()) {
            return Err(Error::RankOutOfRange { mode: 0, rank: k, max: u_k.rows().min(vt_k.cols()) });
        }
        Ok(Self { u_k, s_k, vt_k })
    }

    pub fn rank(&self) -> usize {
        self.s_k.len()
    }

    pub fn u(&self) -> &Matrix {
        &self.u_k
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s_k
    }

    pub fn vt(&self) -> &Matrix {
        &self.vt_k
    }

    pub fn original_shape(&self) -> (usize, usize) {
        (self.u_k.rows(), self.vt_k.cols())
    }
}

pub fn compress_svd(a: &Matrix, k: usize) -> Result<SvdFactors> {
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { mode: 0, rank: k, max });
    }
    let svd = thin_svd(a)?;
    SvdFactors::new(svd.u.leading_columns(k), svd.s[..k].to_vec(), svd.vt.leading_rows(k))
}

pub fn reconstruct_svd(f: &SvdFactors) -> Matrix {
    f.u_k.scale_columns(&f.s_k).matmul(&f.vt_k).expect("shapes validated at construction")
}

/// Smallest `k` whose leading squared singular values reach `fraction` of the total energy.
pub fn select_rank_by_energy(s: &[f64], fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("energy fraction {fraction} not in (0, 1]")));
    }
    if s.iter().any(|&x| !(x >= 0.0)) || s.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("singular values must be nonnegative and nonincreasing".into()));
    }
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return Err(Error::ZeroInput);
    }
    let mut acc = 0.0;
    for (i, x) in s.iter().enumerate() {
        acc += x * x;
        if acc / total >= fraction {
            return Ok(i + 1);
        }
    }
    // unreachable for fraction <= 1 since acc == total after the last term
    Ok(s.len())
}

/// Per-slice truncated SVD of an order-3 or order-4 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedSvd {
    shape: Vec<usize>,
    slices: Vec<SvdFactors>,
}

impl SlicedSvd {
    pub fn new(shape: Vec<usize>, slices: Vec<SvdFactors>) -> Result<Self> {
        if !(3..=4).contains(&shape.len()) {
            return Err(Error::ShapeMismatch(format!(
                "per-slice SVD needs an order-3 or order-4 shape, got {shape:?}"
            )));
        }
        let d = shape.len();
        let count: usize = shape[..d - 2].iter().product();
        let slice_shape = (shape[d - 2], shape[d - 1]);
        if slices.len() != count || slices.iter().any(|f| f.original_shape() != slice_shape) {
            return Err(Error::ShapeMismatch(format!(
                "{} slices do not tile shape {:?}",
                slices.len(),
                shape
            )));
        }
        if slices.windows(2).any(|w| w[0].rank() != w[1].rank()) {
            return Err(Error::Inconsistent("slices must share one rank".into()));
        }
        Ok(Self { shape, slices })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn slices(&self) -> &[SvdFactors] {
        &self.slices
    }

    pub fn rank(&self) -> usize {
        self.slices[0].rank()
    }
}

pub fn compress_svd_slices(t: &DenseTensor, k: usize) -> Result<SlicedSvd> {
    let d = t.order();
    if !(3..=4).contains(&d) {
        return Err(Error::ShapeMismatch(format!(
            "per-slice SVD needs an order-3 or order-4 tensor, got order {d}"
        )));
    }
    let max = t.shape()[d - 2].min(t.shape()[d - 1]);
    if k == 0 || k > max {
        return Err(Error::RankOutOfRange { mode: d - 2, rank: k, max });
    }
    let slices = (0..t.slice_count())
        .map(|i| compress_svd(&t.slice(i)?, k))
        .collect::<Result<Vec<_>>>()?;
    SlicedSvd::new(t.shape().to_vec(), slices)
}

pub fn reconstruct_svd_slices(f: &SlicedSvd) -> DenseTensor {
    let slices: Vec<Matrix> = f.slices.iter().map(reconstruct_svd).collect();
    DenseTensor::from_slices(f.shape.clone(), &slices).expect("shapes validated at construction")
}
