use proptest::prelude::*;
use tprs_core::container::{decode, encode, serialized_size, Dtype, Payload};
use tprs_core::ingest::{decode_volume, encode_volume, VolumeDtype};
use tprs_core::linalg::singular_values;
use tprs_core::metrics::{compression_ratio, data_range, mse, psnr_from_mse, rmse_abs, rmse_rel, ssim, SsimParams};
use tprs_core::svd_codec::{compress_svd, compress_svd_slices};
use tprs_core::tucker::{hooi, hosvd, reconstruct_tucker};
use tprs_core::{fold, frobenius_norm, mode_n_product, unfold, DenseTensor, Matrix};

fn tensor(order: std::ops::RangeInclusive<usize>, extent: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(extent, order).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        prop::collection::vec(-1.0f64..1.0, n).prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

fn matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Matrix> {
    (rows, cols).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1.0f64..1.0, m * n).prop_map(move |data| Matrix::new(m, n, data).unwrap())
    })
}

fn rel_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    let num: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    num.sqrt() / frobenius_norm(a).max(f64::MIN_POSITIVE)
}

fn tail(s: &[f64], k: usize) -> f64 {
    s[k..].iter().map(|x| x * x).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fold_inverts_unfold(t in tensor(2..=4, 1..=5)) {
        for n in 0..t.order() {
            prop_assert_eq!(fold(&unfold(&t, n).unwrap(), n, t.shape()).unwrap(), t.clone());
        }
    }

    #[test]
    fn identity_product_is_identity(t in tensor(2..=4, 1..=5)) {
        for n in 0..t.order() {
            prop_assert_eq!(mode_n_product(&t, &Matrix::identity(t.shape()[n]), n).unwrap(), t.clone());
        }
    }

    #[test]
    fn products_on_distinct_modes_commute(t in tensor(3..=3, 2..=5), seed in prop::collection::vec(-1.0f64..1.0, 36)) {
        let a = Matrix::from_fn(3, t.shape()[0], |i, j| seed[(i * 5 + j) % 36]);
        let b = Matrix::from_fn(2, t.shape()[2], |i, j| seed[(7 + i * 3 + j) % 36]);
        let ab = mode_n_product(&mode_n_product(&t, &a, 0).unwrap(), &b, 2).unwrap();
        let ba = mode_n_product(&mode_n_product(&t, &b, 2).unwrap(), &a, 0).unwrap();
        prop_assert!(rel_diff(&ab, &ba) <= 1e-12);
    }

    #[test]
    fn norm_matches_every_unfolding_spectrum(t in tensor(2..=4, 1..=5)) {
        let norm2 = frobenius_norm(&t).powi(2);
        for n in 0..t.order() {
            let energy: f64 = singular_values(&unfold(&t, n).unwrap()).unwrap().iter().map(|s| s * s).sum();
            prop_assert!((energy - norm2).abs() <= 1e-9 * norm2.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn zero_padding_only_adds_zero_singular_values(a in matrix(2..=8, 2..=8), extra_rows in 0usize..3, extra_cols in 0usize..3) {
        let (m, n) = (a.rows(), a.cols());
        let padded = Matrix::from_fn(m + extra_rows, n + extra_cols, |i, j| if i < m && j < n { a.get(i, j) } else { 0.0 });
        let k = m.min(n);
        let s = compress_svd(&a, k).unwrap();
        let sp = compress_svd(&padded, k).unwrap();
        for (x, y) in s.singular_values().iter().zip(sp.singular_values()) {
            prop_assert!((x - y).abs() <= 1e-12 * s.singular_values()[0].max(1.0));
        }
        let rest = singular_values(&padded).unwrap();
        prop_assert!(rest[k..].iter().all(|&x| x <= 1e-12));
    }

    #[test]
    fn core_norm_bounded_by_tensor_norm(t in tensor(3..=3, 2..=5), r in prop::collection::vec(1usize..=5, 3)) {
        let ranks: Vec<usize> = r.iter().zip(t.shape()).map(|(&r, &i)| r.min(i)).collect();
        let f = hosvd(&t, &ranks).unwrap();
        let (core, full) = (frobenius_norm(f.core()), frobenius_norm(&t));
        prop_assert!(core <= full * (1.0 + 1e-12));
        if ranks == t.shape() {
            prop_assert!((core - full).abs() <= 1e-9 * full);
        }
    }

    #[test]
    fn hosvd_error_within_mode_tail_sum(t in tensor(3..=3, 2..=6), r in prop::collection::vec(1usize..=6, 3)) {
        let ranks: Vec<usize> = r.iter().zip(t.shape()).map(|(&r, &i)| r.min(i)).collect();
        let approx = reconstruct_tucker(&hosvd(&t, &ranks).unwrap());
        let err: f64 = t.data().iter().zip(approx.data()).map(|(x, y)| (x - y) * (x - y)).sum();
        let bound: f64 = (0..3).map(|n| {
            let s = singular_values(&unfold(&t, n).unwrap()).unwrap();
            tail(&s, ranks[n].min(s.len()))
        }).sum();
        prop_assert!(err <= bound * (1.0 + 1e-9) + 1e-24);
    }

    #[test]
    fn hooi_factors_stay_orthonormal(t in tensor(3..=3, 3..=6), iters in 1usize..=4) {
        let ranks: Vec<usize> = t.shape().iter().map(|&i| i - 1).collect();
        let f = hooi(&t, &ranks, iters, 1e-14).unwrap();
        for u in f.factors() {
            prop_assert!(u.orthonormality_residual() < 1e-9);
        }
    }

    #[test]
    fn ssim_symmetric_and_reflexive(x in matrix(7..=12, 7..=12), noise in prop::collection::vec(-0.3f64..0.3, 144)) {
        let y = Matrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) + noise[i * 12 + j]);
        let params = SsimParams::new(2.0);
        prop_assert!((ssim(&x, &x, &params).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(ssim(&x, &y, &params).unwrap(), ssim(&y, &x, &params).unwrap());
    }

    #[test]
    fn rmse_identities(x in tensor(1..=3, 1..=6), shift in prop::collection::vec(-1.0f64..1.0, 216)) {
        let y = DenseTensor::new(x.shape().to_vec(), x.data().iter().zip(&shift).map(|(a, b)| a + b).collect()).unwrap();
        let m = mse(&x, &y).unwrap();
        let abs = rmse_abs(&x, &y).unwrap();
        prop_assert!((abs * abs - m).abs() <= 1e-12 * m.max(1.0));
        prop_assume!(frobenius_norm(&x) > 0.0);
        let expected = abs * (x.len() as f64).sqrt() / frobenius_norm(&x);
        prop_assert!((rmse_rel(&x, &y).unwrap() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn psnr_strictly_antitone(a in 1e-6f64..1e4, b in 1e-6f64..1e4, range in 1.0f64..1e4) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(psnr_from_mse(hi, range).unwrap() < psnr_from_mse(lo, range).unwrap());
    }

    #[test]
    fn compression_ratios_are_reciprocal(a in 1u64..u32::MAX as u64, b in 1u64..u32::MAX as u64) {
        let p = compression_ratio(a, b).unwrap() * compression_ratio(b, a).unwrap();
        prop_assert!((p - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn container_round_trip(t in tensor(3..=3, 2..=5), k in 1usize..=5, f64_payload in any::<bool>()) {
        let dtype = if f64_payload { Dtype::F64 } else { Dtype::F32 };
        let shape = t.shape().to_vec();
        let payloads = [
            Payload::SvdSlices(compress_svd_slices(&t, k.min(shape[1]).min(shape[2])).unwrap()),
            Payload::Tucker(hosvd(&t, &shape.iter().map(|&i| k.min(i)).collect::<Vec<_>>()).unwrap()),
        ];
        for p in payloads {
            let bytes = encode(&p, dtype).unwrap();
            prop_assert_eq!(bytes.len() as u64, serialized_size(&p, dtype));
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(back.encode().unwrap(), bytes);
            if dtype == Dtype::F64 {
                prop_assert_eq!(back.payload, p);
            }
        }
    }

    #[test]
    fn size_strictly_increases_and_ratio_decreases_with_rank(t in tensor(3..=3, 3..=6), mode in 0usize..3) {
        let base: Vec<usize> = t.shape().iter().map(|&i| i - 1).collect();
        let mut bigger = base.clone();
        bigger[mode] += 1;
        let original = t.len() as u64 * 4;
        for dtype in [Dtype::F32, Dtype::F64] {
            let small = serialized_size(&Payload::Tucker(hosvd(&t, &base).unwrap()), dtype);
            let large = serialized_size(&Payload::Tucker(hosvd(&t, &bigger).unwrap()), dtype);
            prop_assert!(large > small);
            prop_assert!(compression_ratio(original, large).unwrap() < compression_ratio(original, small).unwrap());
        }
    }

    #[test]
    fn volume_round_trip_at_every_dtype(shape in prop::collection::vec(1usize..=5, 1..=4), seed in any::<u64>()) {
        let n: usize = shape.iter().product();
        for dtype in [VolumeDtype::U8, VolumeDtype::U16, VolumeDtype::F32] {
            let max = match dtype { VolumeDtype::U8 => 255, VolumeDtype::U16 => 65535, VolumeDtype::F32 => 1 << 20 };
            let data = (0..n).map(|i| ((seed.wrapping_mul(6364136223846793005).wrapping_add((i as u64).wrapping_mul(1442695040888963407)) >> 33) % (max + 1)) as f64).collect();
            let t = DenseTensor::new(shape.clone(), data).unwrap();
            let (back, stored) = decode_volume(&encode_volume(&t, dtype).unwrap()).unwrap();
            prop_assert_eq!(stored, dtype);
            prop_assert_eq!(back, t.clone());
        }
    }
}

#[test]
fn standard_phantom_is_nearly_rank_8() {
    use tprs_core::ingest::{generate_phantom, PhantomSpec};
    let t = generate_phantom(&PhantomSpec::standard()).unwrap();
    let err = rmse_rel(&t, &reconstruct_tucker(&hosvd(&t, &[8, 8, 8]).unwrap())).unwrap();
    assert!(err < 0.05, "{err}");
    assert!(data_range(&t) > 0.0);
}
