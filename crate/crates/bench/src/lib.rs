//! Seeded inputs shared by the benchmarks.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tprs_core::ingest::{generate_phantom, PhantomSpec};
use tprs_core::{DenseTensor, Matrix};

fn uniform(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
}

pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| uniform(&mut r))
}

/// Cubic phantom of side `n` with the standard seed and blob count.
pub fn phantom(n: usize) -> DenseTensor {
    let spec = PhantomSpec { shape: vec![n; 3], ..PhantomSpec::standard() };
    generate_phantom(&spec).expect("valid phantom spec")
}
