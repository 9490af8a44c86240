//! Deterministic synthetic volumes with approximately low multilinear rank.
//!
//! A phantom is a sum of anisotropic Gaussian bumps. Each bump is truncated at
//! an ellipsoidal radius of [`CUTOFF`] widths and shifted down so it reaches
//! zero continuously there; the ellipsoidal cut makes bumps non-separable.
//! Order-4 phantoms are laid out `[time, slice, row, col]` and modulate each
//! bump's amplitude by `1 + 0.5·sin(2π·f·t/T + φ)`. Gaussian noise is added
//! last, and the result is mapped affinely onto `[0, 255]`.
//!
//! Randomness comes from ChaCha20 seeded via `seed_from_u64(seed)`: stream 0
//! draws blob parameters, stream 1 draws noise (Box–Muller). Transcendental
//! functions come from `libm`, so the output is bitwise identical on every
//! platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Truncation radius in units of the per-axis width.
pub const CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub shape: Vec<usize>,
    pub seed: u64,
    pub blob_count: usize,
    /// Cycles over the whole series (order 4 only).
    pub temporal_frequency: f64,
    /// Standard deviation of additive noise, relative to a unit bump peak.
    pub noise_sigma: f64,
}

impl PhantomSpec {
    /// The 32³ noise-free reference volume used by the sweeps and acceptance suite.
    pub fn standard() -> Self {
        Self { shape: vec![32, 32, 32], seed: 2024, blob_count: 3, temporal_frequency: 1.0, noise_sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=4).contains(&self.shape.len()) || self.shape.iter().any(|&e| e == 0) {
            return Err(Error::InvalidParameter(format!(
                "phantom shape must have order 3 or 4 with positive extents, got {:?}",
                self.shape
            )));
        }
        if self.blob_count == 0 {
            return Err(Error::InvalidParameter("phantom needs at least one blob".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        if !self.temporal_frequency.is_finite() {
            return Err(Error::InvalidParameter("temporal frequency must be finite".into()));
        }
        Ok(())
    }

    fn spatial_shape(&self) -> &[usize] {
        if self.shape.len() == 4 {
            &self.shape[1..]
        } else {
            &self.shape
        }
    }

    /// Blob parameters drawn for this spec.
    pub fn blobs(&self) -> Result<Vec<Blob>> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(0);
        let spatial = self.spatial_shape();
        Ok((0..self.blob_count)
            .map(|_| {
                let mut center = Vec::with_capacity(spatial.len());
                let mut width = Vec::with_capacity(spatial.len());
                for &extent in spatial {
                    let span = (extent - 1) as f64;
                    // centres on the half-integer grid so reflections map voxels onto voxels
                    center.push(libm::round((0.25 + 0.5 * unit(&mut rng)) * span * 2.0) / 2.0);
                    width.push((0.08 + 0.12 * unit(&mut rng)) * extent as f64);
                }
                let amplitude = 0.5 + 0.5 * unit(&mut rng);
                let phase = 2.0 * std::f64::consts::PI * unit(&mut rng);
                Blob { center, width, amplitude, phase }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub amplitude: f64,
    pub phase: f64,
}

impl Blob {
    fn profile(&self, index: &[usize]) -> f64 {
        let r2: f64 = index
            .iter()
            .zip(&self.center)
            .zip(&self.width)
            .map(|((&i, &c), &w)| {
                let z = (i as f64 - c) / w;
                z * z
            })
            .sum();
        if r2 >= CUTOFF * CUTOFF {
            0.0
        } else {
            libm::exp(-0.5 * r2) - libm::exp(-0.5 * CUTOFF * CUTOFF)
        }
    }
}

/// Uniform in [0, 1) from the top 53 bits.
fn unit(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn generate_phantom(spec: &PhantomSpec) -> Result<DenseTensor> {
    let blobs = spec.blobs()?;
    let order4 = spec.shape.len() == 4;
    let frames = if order4 { spec.shape[0] } else { 1 };
    let spatial = spec.spatial_shape().to_vec();

    let spatial_profiles: Vec<DenseTensor> = blobs
        .iter()
        .map(|b| DenseTensor::from_fn(spatial.clone(), |i| b.profile(i)))
        .collect::<Result<_>>()?;

    let voxels: usize = spatial.iter().product();
    let mut data = vec![0.0; frames * voxels];
    for t in 0..frames {
        let frame = &mut data[t * voxels..(t + 1) * voxels];
        for (b, profile) in blobs.iter().zip(&spatial_profiles) {
            let gain = if order4 {
                let angle = 2.0 * std::f64::consts::PI * spec.temporal_frequency * t as f64 / frames as f64 + b.phase;
                b.amplitude * (1.0 + 0.5 * libm::sin(angle))
            } else {
                b.amplitude
            };
            for (v, &p) in frame.iter_mut().zip(profile.data()) {
                *v += gain * p;
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let mut spare: Option<f64> = None;
        for v in data.iter_mut() {
            let z = match spare.take() {
                Some(z) => z,
                None => {
                    // u1 in (0, 1] keeps the logarithm finite
                    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
                    let u2 = unit(&mut rng);
                    let radius = (-2.0 * libm::log(u1)).sqrt();
                    let angle = 2.0 * std::f64::consts::PI * u2;
                    spare = Some(radius * libm::sin(angle));
                    radius * libm::cos(angle)
                }
            };
            *v += spec.noise_sigma * z;
        }
    }

    let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    data.iter_mut().for_each(|x| *x = (*x - lo) * scale);
    DenseTensor::new(spec.shape.clone(), data)
}
