use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{DenseTensor, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in [-1, 1).
pub fn uniform(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
}

pub fn random_tensor(r: &mut ChaCha8Rng, shape: &[usize]) -> DenseTensor {
    let n = shape.iter().product();
    DenseTensor::new(shape.to_vec(), (0..n).map(|_| uniform(r)).collect()).unwrap()
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| uniform(r))
}
