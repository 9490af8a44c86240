//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The kernel orthogonalises the columns of the tall orientation of the input
//! with plane rotations until every pair is orthogonal to working precision.
//! Columns whose norm falls below `ε·‖a‖_F` are treated as numerically null and
//! are no longer rotated; their rounding noise would otherwise never settle.
//!
//! Sign convention: in every left singular vector the entry of largest
//! magnitude (lowest row index on ties) is nonnegative.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAX_SWEEPS: usize = 100;

/// `a = u · diag(s) · vt` with `p = min(rows, cols)` singular triples.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    /// `rows × p`, orthonormal columns.
    pub u: Matrix,
    /// Nonincreasing, nonnegative.
    pub s: Vec<f64>,
    /// `p × cols`, orthonormal rows.
    pub vt: Matrix,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> Matrix {
        self.u.scale_columns(&self.s).matmul(&self.vt).expect("conforming by construction")
    }
}

pub fn thin_svd(a: &Matrix) -> Result<SvdTriple> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let wide = a.rows() < a.cols();
    let work = if wide { a.transpose() } else { a.clone() };
    let (m, p) = (work.rows(), work.cols());

    // column-major working copies
    let mut w: Vec<Vec<f64>> = (0..p).map(|j| work.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = m as f64 * f64::EPSILON;
    let negligible = {
        let f: f64 = w.iter().map(|c| dot(c, c)).sum();
        f * f64::EPSILON * f64::EPSILON
    };
    let mut converged = p == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..p - 1 {
            for j in i + 1..p {
                let alpha = dot(&w[i], &w[i]);
                let beta = dot(&w[j], &w[j]);
                let gamma = dot(&w[i], &w[j]);
                if alpha <= negligible || beta <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = w.split_at_mut(j);
                rotate(&mut left[i], &mut right[0], c, s);
                let (left, right) = v.split_at_mut(j);
                rotate(&mut left[i], &mut right[0], c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let s_max = norms[order[0]];
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        if sigma > 0.0 && sigma > s_max * 1e-300 {
            left.push(w[j].iter().map(|x| x / sigma).collect());
        } else {
            left.push(Vec::new());
            pending.push(k);
        }
    }
    // Null directions: extend to an orthonormal set using standard basis vectors.
    for k in pending {
        let basis: Vec<&Vec<f64>> = left.iter().filter(|c| !c.is_empty()).collect();
        let candidate = complete_basis(&basis, m);
        left[k] = candidate;
    }
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut right: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();

    // Sign convention is stated on the left vectors of `a`, which are `left` for
    // tall inputs and `right` for wide ones.
    for k in 0..p {
        let pivot = if wide { &right[k] } else { &left[k] };
        if needs_flip(pivot) {
            left[k].iter_mut().for_each(|x| *x = -*x);
            right[k].iter_mut().for_each(|x| *x = -*x);
        }
    }

    // `left` are columns (length m) and `right` columns (length p) of the work matrix.
    let (u, vt) = if wide {
        // a^T = L S R^T  =>  a = R S L^T
        (columns_to_matrix(&right, p), rows_to_matrix(&left, m))
    } else {
        (columns_to_matrix(&left, m), rows_to_matrix(&right, p))
    };
    Ok(SvdTriple { u, s, vt })
}

/// Top-`r` left singular subspace of `a`: the first `r` columns of `thin_svd(a).u`.
pub fn leading_left_singular_vectors(a: &Matrix, r: usize) -> Result<Matrix> {
    let p = a.rows().min(a.cols());
    if r == 0 || r > p {
        return Err(Error::RankOutOfRange { mode: 0, rank: r, max: p });
    }
    Ok(thin_svd(a)?.u.leading_columns(r))
}

/// Singular values only.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(thin_svd(a)?.s)
}

fn needs_flip(column: &[f64]) -> bool {
    let mut best = 0usize;
    for (i, x) in column.iter().enumerate() {
        if x.abs() > column[best].abs() {
            best = i;
        }
    }
    column[best] < 0.0
}

/// The standard basis vector with the largest residual against `basis`
/// (lowest index on ties), orthogonalised and normalised. For orthonormal
/// `basis` the residual of `e_i` is `1 − Σ b_i²`.
fn complete_basis(basis: &[&Vec<f64>], m: usize) -> Vec<f64> {
    let mut residual = vec![1.0; m];
    for b in basis {
        residual.iter_mut().zip(b.iter()).for_each(|(r, x)| *r -= x * x);
    }
    let mut e = 0;
    for (i, &r) in residual.iter().enumerate() {
        if r > residual[e] {
            e = i;
        }
    }
    let mut c = vec![0.0; m];
    c[e] = 1.0;
    for _ in 0..2 {
        for b in basis {
            let proj = dot(&c, b);
            c.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= proj * y);
        }
    }
    let norm = dot(&c, &c).sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
    c
}

fn columns_to_matrix(columns: &[Vec<f64>], rows: usize) -> Matrix {
    Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> Matrix {
    Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_matrix, rng};
    use proptest::prelude::*;

    fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
        let diff: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum();
        diff.sqrt() / a.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    fn row_orthonormality_residual(m: &Matrix) -> f64 {
        m.transpose().orthonormality_residual()
    }

    fn check_triple(a: &Matrix, svd: &SvdTriple) {
        let p = a.rows().min(a.cols());
        assert_eq!(svd.s.len(), p);
        assert_eq!((svd.u.rows(), svd.u.cols()), (a.rows(), p));
        assert_eq!((svd.vt.rows(), svd.vt.cols()), (p, a.cols()));
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.s.iter().all(|&x| x >= 0.0));
        assert!(svd.u.orthonormality_residual() < 1e-9);
        assert!(row_orthonormality_residual(&svd.vt) < 1e-9);
        if a.frobenius_norm() > 0.0 {
            assert!(rel_diff(a, &svd.reconstruct()) < 1e-9);
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let svd = thin_svd(&Matrix::identity(3)).unwrap();
        assert_eq!(svd.s, vec![1.0, 1.0, 1.0]);
        assert_eq!(svd.u, Matrix::identity(3));

        let d = Matrix::from_diag(&[3.0, 1.0]);
        let svd = thin_svd(&d).unwrap();
        assert_eq!(svd.s, vec![3.0, 1.0]);
        assert_eq!(svd.reconstruct(), d);
    }

    #[test]
    fn unsorted_diagonal_is_sorted() {
        let d = Matrix::from_diag(&[1.0, 5.0, 3.0]);
        let svd = thin_svd(&d).unwrap();
        assert_eq!(svd.s, vec![5.0, 3.0, 1.0]);
        check_triple(&d, &svd);
    }

    #[test]
    fn random_6x4_norm_identity() {
        let a = random_matrix(&mut rng(11), 6, 4);
        let svd = thin_svd(&a).unwrap();
        check_triple(&a, &svd);
        let energy: f64 = svd.s.iter().map(|x| x * x).sum();
        let norm2 = a.frobenius_norm().powi(2);
        assert!((energy - norm2).abs() <= 1e-9 * norm2);
    }

    #[test]
    fn wide_and_rank_deficient_inputs() {
        let mut r = rng(12);
        let a = random_matrix(&mut r, 3, 9);
        check_triple(&a, &thin_svd(&a).unwrap());

        // rank 1 with explicit zero column
        let x = [1.0, -2.0, 0.5, 3.0];
        let y = [2.0, 0.0, -1.0];
        let a = Matrix::from_fn(4, 3, |i, j| x[i] * y[j]);
        let svd = thin_svd(&a).unwrap();
        check_triple(&a, &svd);
        assert!(svd.s[1] < 1e-12 * svd.s[0]);

        let z = Matrix::zeros(3, 2);
        let svd = thin_svd(&z).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0]);
        check_triple(&z, &svd);
    }

    #[test]
    fn rejects_non_finite() {
        let a = Matrix::new(1, 2, vec![1.0, f64::NAN]).unwrap();
        assert!(matches!(thin_svd(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn sign_convention() {
        let a = random_matrix(&mut rng(13), 7, 5);
        let svd = thin_svd(&a).unwrap();
        for k in 0..5 {
            let col = svd.u.column(k);
            let (mut best, mut mag) = (0, -1.0);
            for (i, x) in col.iter().enumerate() {
                if x.abs() > mag {
                    best = i;
                    mag = x.abs();
                }
            }
            assert!(col[best] >= 0.0);
        }
        // wide inputs follow the same rule on u
        let w = a.transpose();
        let svd = thin_svd(&w).unwrap();
        for k in 0..5 {
            assert!(!needs_flip(&svd.u.column(k)));
        }
    }

    #[test]
    fn leading_vectors_examples() {
        let q = leading_left_singular_vectors(&Matrix::identity(4), 2).unwrap();
        assert_eq!(q, Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]).unwrap());

        let q = leading_left_singular_vectors(&Matrix::from_diag(&[5.0, 3.0, 1.0]), 1).unwrap();
        assert_eq!(q.column(0), vec![1.0, 0.0, 0.0]);

        assert!(matches!(
            leading_left_singular_vectors(&Matrix::identity(3), 4),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(leading_left_singular_vectors(&Matrix::identity(3), 0).is_err());
    }

    #[test]
    fn leading_vectors_projection_residual() {
        let a = random_matrix(&mut rng(14), 8, 6);
        let full = thin_svd(&a).unwrap();
        let tail: f64 = full.s[3..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let q = leading_left_singular_vectors(&a, 3).unwrap();
        let proj = q.matmul(&q.transpose().matmul(&a).unwrap()).unwrap();
        let resid: f64 = a.data().iter().zip(proj.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!((resid - tail).abs() <= 1e-9 * (1.0 + tail));
        assert_eq!(q, full.u.leading_columns(3));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn energy_and_transpose_invariants(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let a = random_matrix(&mut rng(seed), rows, cols);
            let svd = thin_svd(&a).unwrap();
            check_triple(&a, &svd);
            let energy: f64 = svd.s.iter().map(|x| x * x).sum();
            let norm2 = a.frobenius_norm().powi(2);
            prop_assert!((energy - norm2).abs() <= 1e-9 * norm2);

            let st = singular_values(&a.transpose()).unwrap();
            for (x, y) in svd.s.iter().zip(&st) {
                prop_assert!((x - y).abs() <= 1e-10 * svd.s[0]);
            }
        }

        #[test]
        fn scaling_invariant(seed in any::<u64>(), c in 0.01f64..100.0) {
            let a = random_matrix(&mut rng(seed), 6, 4);
            let scaled = Matrix::new(6, 4, a.data().iter().map(|x| c * x).collect()).unwrap();
            let (s1, s2) = (thin_svd(&a).unwrap(), thin_svd(&scaled).unwrap());
            for (x, y) in s1.s.iter().zip(&s2.s) {
                prop_assert!((c * x - y).abs() <= 1e-10 * c * s1.s[0]);
            }
            prop_assert!(rel_diff(&s1.u, &s2.u) < 1e-8);
            prop_assert!(rel_diff(&s1.vt, &s2.vt) < 1e-8);
        }
    }
}
