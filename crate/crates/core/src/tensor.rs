//! Dense N-way tensors and matrices.
//!
//! Storage is row-major (last index fastest) in `f64`. Mode-`n` unfolding follows
//! the Kolda–Bader convention: the row index is `i_n`, and the column index is
//! `sum_{k != n} i_k * J_k` with `J_k = prod_{m < k, m != n} I_m`, so among the
//! remaining modes the lowest-numbered one varies fastest.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn validate_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::InvalidShape { shape: shape.to_vec(), reason: "order must be at least 1" });
    }
    if shape.iter().any(|&e| e == 0) {
        return Err(Error::InvalidShape { shape: shape.to_vec(), reason: "extents must be positive" });
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or(Error::InvalidShape { shape: shape.to_vec(), reason: "element count overflows" })
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} needs {} samples, got {}",
                shape,
                len,
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        Ok(Self { shape, data: vec![0.0; len] })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = validate_shape(&shape)?;
        let mut data = Vec::with_capacity(len);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&index));
            increment(&mut index, &shape);
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.shape.len());
        let mut offset = 0;
        for (&i, &extent) in index.iter().zip(&self.shape) {
            debug_assert!(i < extent);
            offset = offset * extent + i;
        }
        offset
    }

    pub fn multi_index(&self, mut offset: usize) -> Vec<usize> {
        let mut index = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            index[k] = offset % self.shape[k];
            offset /= self.shape[k];
        }
        index
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let offset = self.offset(index);
        self.data[offset] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }

    /// Views an order-2 tensor as a matrix.
    pub fn to_matrix(&self) -> Result<Matrix> {
        match self.shape[..] {
            [rows, cols] => Matrix::new(rows, cols, self.data.clone()),
            _ => Err(Error::ShapeMismatch(format!(
                "expected an order-2 tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Number of trailing 2-D slices (product of all but the last two extents).
    pub fn slice_count(&self) -> usize {
        self.shape[..self.shape.len().saturating_sub(2)].iter().product()
    }

    /// The `index`-th 2-D slice over the last two modes, in row-major slice order.
    pub fn slice(&self, index: usize) -> Result<Matrix> {
        if self.order() < 2 {
            return Err(Error::ShapeMismatch("slices need an order of at least 2".into()));
        }
        let rows = self.shape[self.order() - 2];
        let cols = self.shape[self.order() - 1];
        if index >= self.slice_count() {
            return Err(Error::InvalidParameter(format!("slice {index} out of range")));
        }
        let n = rows * cols;
        Matrix::new(rows, cols, self.data[index * n..(index + 1) * n].to_vec())
    }

    /// Reassembles slices (as produced by [`DenseTensor::slice`]) into a tensor of `shape`.
    pub fn from_slices(shape: Vec<usize>, slices: &[Matrix]) -> Result<Self> {
        let len = validate_shape(&shape)?;
        if shape.len() < 2 {
            return Err(Error::ShapeMismatch("slices need an order of at least 2".into()));
        }
        let (rows, cols) = (shape[shape.len() - 2], shape[shape.len() - 1]);
        if slices.len() * rows * cols != len
            || slices.iter().any(|s| s.rows() != rows || s.cols() != cols)
        {
            return Err(Error::ShapeMismatch(format!(
                "{} slices do not assemble into shape {:?}",
                slices.len(),
                shape
            )));
        }
        let mut data = Vec::with_capacity(len);
        for s in slices {
            data.extend_from_slice(s.data());
        }
        Ok(Self { shape, data })
    }
}

impl From<Matrix> for DenseTensor {
    fn from(m: Matrix) -> Self {
        DenseTensor { shape: vec![m.rows, m.cols], data: m.data }
    }
}

fn increment(index: &mut [usize], shape: &[usize]) {
    for k in (0..shape.len()).rev() {
        index[k] += 1;
        if index[k] < shape[k] {
            return;
        }
        index[k] = 0;
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        validate_shape(&[rows, cols])?;
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} samples, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix extents must be positive");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix extents must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data: out }
    }

    /// First `n` columns.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        assert!(n >= 1 && n <= self.cols);
        Matrix::from_fn(self.rows, n, |i, j| self.get(i, j))
    }

    /// First `n` rows.
    pub fn leading_rows(&self, n: usize) -> Matrix {
        assert!(n >= 1 && n <= self.rows);
        Matrix { rows: n, cols: self.cols, data: self.data[..n * self.cols].to_vec() }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Matrix { rows: self.rows, cols: rhs.cols, data: out })
    }

    /// `self` with column `j` scaled by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Matrix {
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.cols) {
            for (x, &s) in row.iter_mut().zip(scale) {
                *x *= s;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `||self^T self - I||_F`, zero for a column-orthonormal matrix.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.transpose().matmul(self).expect("conforming by construction");
        let mut acc = 0.0;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let d = gram.get(i, j) - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Mode-`mode` matricization of `t`.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    let order = t.order();
    if mode >= order {
        return Err(Error::ModeOutOfRange { mode, order });
    }
    let shape = t.shape();
    let rows = shape[mode];
    let cols = t.len() / rows;
    let col_strides = unfold_column_strides(shape, mode);
    let mut out = vec![0.0; t.len()];
    let mut index = vec![0usize; order];
    for &x in t.data() {
        let col: usize = (0..order).filter(|&k| k != mode).map(|k| index[k] * col_strides[k]).sum();
        out[index[mode] * cols + col] = x;
        increment(&mut index, shape);
    }
    Matrix::new(rows, cols, out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    let len = validate_shape(shape)?;
    let order = shape.len();
    if mode >= order {
        return Err(Error::ModeOutOfRange { mode, order });
    }
    if m.rows() != shape[mode] || m.rows() * m.cols() != len {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix cannot fold into shape {:?} along mode {}",
            m.rows(),
            m.cols(),
            shape,
            mode
        )));
    }
    let col_strides = unfold_column_strides(shape, mode);
    let cols = m.cols();
    let mut data = Vec::with_capacity(len);
    let mut index = vec![0usize; order];
    for _ in 0..len {
        let col: usize = (0..order).filter(|&k| k != mode).map(|k| index[k] * col_strides[k]).sum();
        data.push(m.data()[index[mode] * cols + col]);
        increment(&mut index, shape);
    }
    DenseTensor::new(shape.to_vec(), data)
}

fn unfold_column_strides(shape: &[usize], mode: usize) -> Vec<usize> {
    let mut strides = vec![0; shape.len()];
    let mut acc = 1;
    for (k, &extent) in shape.iter().enumerate() {
        if k != mode {
            strides[k] = acc;
            acc *= extent;
        }
    }
    strides
}

/// `t ×_mode m`: contracts mode `mode` of `t` with the columns of `m`.
///
/// Equal to `fold(m · unfold(t, mode), mode, ..)`, evaluated directly on the
/// row-major layout as an `(outer, I_mode, inner)` contraction.
pub fn mode_n_product(t: &DenseTensor, m: &Matrix, mode: usize) -> Result<DenseTensor> {
    let order = t.order();
    if mode >= order {
        return Err(Error::ModeOutOfRange { mode, order });
    }
    let shape = t.shape();
    if m.cols() != shape[mode] {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix cannot act on mode {} of extent {}",
            m.rows(),
            m.cols(),
            mode,
            shape[mode]
        )));
    }
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    let (n_in, n_out) = (shape[mode], m.rows());
    let mut out = vec![0.0; outer * n_out * inner];
    let src = t.data();
    for o in 0..outer {
        let src_block = &src[o * n_in * inner..(o + 1) * n_in * inner];
        let dst_block = &mut out[o * n_out * inner..(o + 1) * n_out * inner];
        for a in 0..n_out {
            let dst = &mut dst_block[a * inner..(a + 1) * inner];
            for (j, &w) in m.row(a).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (d, &s) in dst.iter_mut().zip(&src_block[j * inner..(j + 1) * inner]) {
                    *d += w * s;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[mode] = n_out;
    DenseTensor::new(new_shape, out)
}

pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    t.data().iter().map(|x| x * x).sum::<f64>().sqrt()
}
