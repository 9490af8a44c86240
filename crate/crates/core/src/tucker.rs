//! Tucker codec: `X ≈ G ×₁ U₁ ×₂ U₂ … ×_d U_d` with column-orthonormal factors.
//!
//! Factors are initialised by HOSVD (leading left singular vectors of each
//! mode unfolding) and optionally refined by higher-order orthogonal iteration.

use crate::error::{Error, Result};
use crate::linalg::{singular_values, thin_svd};
use crate::tensor::{frobenius_norm, mode_n_product, unfold, DenseTensor, Matrix};

pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerFactors {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

impl TuckerFactors {
    /// Checks that factor `n` is `I_n × r_n` where `r_n` is the core extent along `n`.
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if core.order() != factors.len() {
            return Err(Error::ShapeMismatch(format!(
                "order-{} core with {} factors",
                core.order(),
                factors.len()
            )));
        }
        for (n, (f, &r)) in factors.iter().zip(core.shape()).enumerate() {
            if f.cols() != r {
                return Err(Error::ShapeMismatch(format!(
                    "factor {n} has {} columns, core extent is {r}",
                    f.cols()
                )));
            }
            if r > f.rows() {
                return Err(Error::RankOutOfRange { mode: n, rank: r, max: f.rows() });
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.shape().to_vec()
    }

    pub fn original_shape(&self) -> Vec<usize> {
        self.factors.iter().map(Matrix::rows).collect()
    }
}

/// How the factor matrices are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TuckerMethod {
    Hosvd,
    Hooi { max_iters: usize, tol: f64 },
}

impl Default for TuckerMethod {
    fn default() -> Self {
        TuckerMethod::Hooi { max_iters: DEFAULT_MAX_ITERS, tol: DEFAULT_TOL }
    }
}

pub fn decompose(t: &DenseTensor, ranks: &[usize], method: TuckerMethod) -> Result<TuckerFactors> {
    match method {
        TuckerMethod::Hosvd => hosvd(t, ranks),
        TuckerMethod::Hooi { max_iters, tol } => hooi(t, ranks, max_iters, tol),
    }
}

pub fn validate_ranks(shape: &[usize], ranks: &[usize]) -> Result<()> {
    if ranks.len() != shape.len() {
        return Err(Error::InvalidParameter(format!(
            "{} ranks given for an order-{} tensor",
            ranks.len(),
            shape.len()
        )));
    }
    for (mode, (&rank, &extent)) in ranks.iter().zip(shape).enumerate() {
        if rank == 0 || rank > extent {
            return Err(Error::RankOutOfRange { mode, rank, max: extent });
        }
    }
    Ok(())
}

/// Leading `r` left singular vectors, also when `r` exceeds the column count of `a`
/// (the unfolding is then padded with zero columns, which only appends null directions).
fn left_basis(a: &Matrix, r: usize) -> Result<Matrix> {
    let svd = if r > a.cols() {
        let padded = Matrix::from_fn(a.rows(), a.rows(), |i, j| if j < a.cols() { a.get(i, j) } else { 0.0 });
        thin_svd(&padded)?
    } else {
        thin_svd(a)?
    };
    Ok(svd.u.leading_columns(r))
}

/// `t ×₁ U₁ᵀ … ×_d U_dᵀ`, skipping `skip` if given.
fn project(t: &DenseTensor, factors: &[Matrix], skip: Option<usize>) -> Result<DenseTensor> {
    let mut out = t.clone();
    for (n, u) in factors.iter().enumerate() {
        if Some(n) != skip {
            out = mode_n_product(&out, &u.transpose(), n)?;
        }
    }
    Ok(out)
}

pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerFactors> {
    validate_ranks(t.shape(), ranks)?;
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let factors = ranks
        .iter()
        .enumerate()
        .map(|(n, &r)| left_basis(&unfold(t, n)?, r))
        .collect::<Result<Vec<_>>>()?;
    let core = project(t, &factors, None)?;
    TuckerFactors::new(core, factors)
}

/// Outcome of a HOOI run together with its fit history.
#[derive(Debug, Clone)]
pub struct HooiTrace {
    pub factors: TuckerFactors,
    /// `‖core‖_F / ‖t‖_F`, starting with the HOSVD fit; one entry per accepted sweep.
    pub fits: Vec<f64>,
    /// Sweeps performed, including a final rejected one.
    pub iterations: usize,
}

pub fn hooi(t: &DenseTensor, ranks: &[usize], max_iters: usize, tol: f64) -> Result<TuckerFactors> {
    Ok(hooi_traced(t, ranks, max_iters, tol)?.factors)
}

pub fn hooi_traced(t: &DenseTensor, ranks: &[usize], max_iters: usize, tol: f64) -> Result<HooiTrace> {
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut current = hosvd(t, ranks)?;
    let norm = frobenius_norm(t);
    if norm == 0.0 {
        return Ok(HooiTrace { factors: current, fits: vec![1.0], iterations: 0 });
    }
    let mut fits = vec![frobenius_norm(current.core()) / norm];
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut factors = current.factors.clone();
        for n in 0..t.order() {
            let partial = project(t, &factors, Some(n))?;
            factors[n] = left_basis(&unfold(&partial, n)?, ranks[n])?;
        }
        let core = project(t, &factors, None)?;
        let fit = frobenius_norm(&core) / norm;
        let prev = *fits.last().expect("seeded with the HOSVD fit");
        // A sweep never lowers the fit in exact arithmetic; a drop is rounding at convergence.
        if fit < prev {
            break;
        }
        current = TuckerFactors::new(core, factors)?;
        fits.push(fit);
        if (fit - prev) / prev < tol {
            break;
        }
    }
    Ok(HooiTrace { factors: current, fits, iterations })
}

pub fn reconstruct_tucker(f: &TuckerFactors) -> DenseTensor {
    let mut out = f.core.clone();
    for (n, u) in f.factors.iter().enumerate() {
        out = mode_n_product(&out, u, n).expect("shapes validated at construction");
    }
    out
}

/// Per mode, the number of components whose share of the unfolding's squared
/// singular values is at least `threshold` (never fewer than one).
pub fn select_ranks_by_variance(t: &DenseTensor, threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("variance threshold {threshold} not in (0, 1)")));
    }
    if frobenius_norm(t) == 0.0 {
        return Err(Error::ZeroInput);
    }
    (0..t.order())
        .map(|n| {
            let s = singular_values(&unfold(t, n)?)?;
            let total: f64 = s.iter().map(|x| x * x).sum();
            let kept = s.iter().filter(|&&x| x * x / total >= threshold).count();
            Ok(kept.max(1))
        })
        .collect()
}
