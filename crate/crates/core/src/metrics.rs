//! Fidelity and efficiency metrics: MSE, PSNR, absolute/relative RMSE, SSIM,
//! compression ratio.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{frobenius_norm, DenseTensor, Matrix};

fn check_shapes(x: &DenseTensor, y: &DenseTensor) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", x.shape(), y.shape())));
    }
    Ok(())
}

pub fn mse(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    check_shapes(x, y)?;
    let sum: f64 = x.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / x.len() as f64)
}

/// Peak-to-peak range of `x`, the default PSNR/SSIM dynamic range.
pub fn data_range(x: &DenseTensor) -> f64 {
    let (lo, hi) = x.min_max();
    hi - lo
}

/// `10·log10(range² / mse)`; `+inf` when `mse == 0`.
pub fn psnr_from_mse(mse: f64, data_range: f64) -> Result<f64> {
    if !(data_range > 0.0) {
        return Err(Error::InvalidParameter(format!("data range {data_range} must be positive")));
    }
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / mse).log10())
}

pub fn psnr(x: &DenseTensor, y: &DenseTensor, data_range: f64) -> Result<f64> {
    psnr_from_mse(mse(x, y)?, data_range)
}

pub fn rmse_abs(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    Ok(mse(x, y)?.sqrt())
}

/// `‖x − y‖_F / ‖x‖_F`.
pub fn rmse_rel(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    check_shapes(x, y)?;
    let reference = frobenius_norm(x);
    if reference == 0.0 {
        return Err(Error::ZeroInput);
    }
    let diff: f64 = x.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff.sqrt() / reference)
}

pub fn compression_ratio(original_bytes: u64, compressed_bytes: u64) -> Result<f64> {
    if compressed_bytes == 0 || original_bytes == 0 {
        return Err(Error::InvalidParameter("byte counts must be positive".into()));
    }
    Ok(original_bytes as f64 / compressed_bytes as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Side of the square uniform window.
    pub window: usize,
    pub data_range: f64,
    pub k1: f64,
    pub k2: f64,
}

impl SsimParams {
    pub fn new(data_range: f64) -> Self {
        Self { window: 7, data_range, k1: 0.01, k2: 0.03 }
    }
}

/// Mean SSIM over all `window × window` windows lying fully inside the image.
///
/// Window statistics use the sample (n − 1) normalisation for variances and
/// covariance; `C₁ = (k1·L)²`, `C₂ = (k2·L)²`.
pub fn ssim(x: &Matrix, y: &Matrix, params: &SsimParams) -> Result<f64> {
    if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    if !(params.data_range > 0.0) {
        return Err(Error::InvalidParameter(format!("data range {} must be positive", params.data_range)));
    }
    let w = params.window;
    if w < 2 || x.rows() < w || x.cols() < w {
        return Err(Error::InvalidParameter(format!(
            "{}x{} image is smaller than the {w}x{w} window",
            x.rows(),
            x.cols()
        )));
    }
    let c1 = (params.k1 * params.data_range).powi(2);
    let c2 = (params.k2 * params.data_range).powi(2);
    let n = (w * w) as f64;

    let sx = box_sums_pair(x, y, w, |a, _| a);
    let sy = box_sums_pair(x, y, w, |_, b| b);
    let sxx = box_sums_pair(x, y, w, |a, _| a * a);
    let syy = box_sums_pair(x, y, w, |_, b| b * b);
    let sxy = box_sums_pair(x, y, w, |a, b| a * b);

    let mut total = 0.0;
    for i in 0..sx.len() {
        let (mx, my) = (sx[i] / n, sy[i] / n);
        let vx = (sxx[i] - sx[i] * sx[i] / n) / (n - 1.0);
        let vy = (syy[i] - sy[i] * sy[i] / n) / (n - 1.0);
        let cov = (sxy[i] - sx[i] * sy[i] / n) / (n - 1.0);
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / sx.len() as f64)
}

/// SSIM of a matrix, or the mean per-slice SSIM over the last two modes of a higher-order tensor.
pub fn ssim_tensor(x: &DenseTensor, y: &DenseTensor, params: &SsimParams) -> Result<f64> {
    check_shapes(x, y)?;
    if x.order() < 2 {
        return Err(Error::ShapeMismatch("SSIM needs at least two modes".into()));
    }
    let count = x.slice_count();
    let mut total = 0.0;
    for i in 0..count {
        total += ssim(&x.slice(i)?, &y.slice(i)?, params)?;
    }
    Ok(total / count as f64)
}

/// Sums of `f(x, y)` over every fully-contained `w × w` window, row-major over window origins.
/// Separable: column sums of `w` rows, then sums of `w` adjacent column sums.
fn box_sums_pair(x: &Matrix, y: &Matrix, w: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let (rows, cols) = (x.rows(), x.cols());
    let (out_rows, out_cols) = (rows - w + 1, cols - w + 1);
    let mut out = Vec::with_capacity(out_rows * out_cols);
    let mut column = vec![0.0; cols];
    for i in 0..out_rows {
        for (j, c) in column.iter_mut().enumerate() {
            *c = (i..i + w).map(|r| f(x.get(r, j), y.get(r, j))).sum();
        }
        for j in 0..out_cols {
            out.push(column[j..j + w].iter().sum());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Svd,
    Tucker,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Svd => "svd",
            Method::Tucker => "tucker",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Method::Svd),
            "tucker" => Ok(Method::Tucker),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// One row of a rank sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: Method,
    pub ranks: Vec<usize>,
    pub original_bytes: u64,
    pub compressed_bytes: u64,
    pub compression_ratio: f64,
    pub mse: f64,
    /// `+inf` for a perfect reconstruction.
    pub psnr_db: f64,
    pub rmse_abs: f64,
    pub rmse_rel: f64,
    pub ssim: Option<f64>,
}

impl EvaluationReport {
    /// Scores `reconstructed` against `original`. PSNR and SSIM use the peak-to-peak
    /// range of `original`; SSIM is computed only when `with_ssim` is set.
    pub fn evaluate(
        method: Method,
        ranks: Vec<usize>,
        original: &DenseTensor,
        reconstructed: &DenseTensor,
        original_bytes: u64,
        compressed_bytes: u64,
        with_ssim: bool,
    ) -> Result<Self> {
        let mse = mse(original, reconstructed)?;
        let range = data_range(original);
        let ssim = if with_ssim { Some(ssim_tensor(original, reconstructed, &SsimParams::new(range))?) } else { None };
        Ok(Self {
            method,
            ranks,
            original_bytes,
            compressed_bytes,
            compression_ratio: compression_ratio(original_bytes, compressed_bytes)?,
            mse,
            psnr_db: psnr_from_mse(mse, range)?,
            rmse_abs: mse.sqrt(),
            rmse_rel: rmse_rel(original, reconstructed)?,
            ssim,
        })
    }
}
