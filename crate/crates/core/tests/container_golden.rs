//! Byte-exact fixtures written by an independent `struct.pack` script.

use tprs_core::container::{decode, encode, header_len, serialized_size, Dtype, MethodTag, Payload};
use tprs_core::svd_codec::{SlicedSvd, SvdFactors};
use tprs_core::tucker::TuckerFactors;
use tprs_core::{DenseTensor, Matrix};

const SVD_F32: &[u8] = include_bytes!("golden/svd_3x2_k1_f32.tprs");
const TUCKER_F64: &[u8] = include_bytes!("golden/tucker_2x3x2_r121_f64.tprs");
const SLICES_F32: &[u8] = include_bytes!("golden/slices_2x2x3_k1_f32.tprs");

fn svd(u: &[f64], s: f64, vt: &[f64]) -> SvdFactors {
    SvdFactors::new(
        Matrix::new(u.len(), 1, u.to_vec()).unwrap(),
        vec![s],
        Matrix::new(1, vt.len(), vt.to_vec()).unwrap(),
    )
    .unwrap()
}

fn svd_payload() -> Payload {
    Payload::Svd(svd(&[0.5, -0.25, 0.75], 3.0, &[1.0, -2.0]))
}

fn tucker_payload() -> Payload {
    let core = DenseTensor::new(vec![1, 2, 1], vec![2.0, -1.5]).unwrap();
    let factors = vec![
        Matrix::new(2, 1, vec![1.0, 0.5]).unwrap(),
        Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.25, -0.5]]).unwrap(),
        Matrix::new(2, 1, vec![0.125, -1.0]).unwrap(),
    ];
    Payload::Tucker(TuckerFactors::new(core, factors).unwrap())
}

fn slices_payload() -> Payload {
    let slices = vec![svd(&[1.0, 0.0], 2.0, &[0.0, 1.0, 0.0]), svd(&[0.0, -1.0], 0.5, &[0.25, 0.5, -0.75])];
    Payload::SvdSlices(SlicedSvd::new(vec![2, 2, 3], slices).unwrap())
}

#[test]
fn encode_matches_fixtures() {
    assert_eq!(encode(&svd_payload(), Dtype::F32).unwrap(), SVD_F32);
    assert_eq!(encode(&tucker_payload(), Dtype::F64).unwrap(), TUCKER_F64);
    assert_eq!(encode(&slices_payload(), Dtype::F32).unwrap(), SLICES_F32);
}

#[test]
fn decode_fixtures() {
    for (bytes, payload, dtype, method) in [
        (SVD_F32, svd_payload(), Dtype::F32, MethodTag::Svd),
        (TUCKER_F64, tucker_payload(), Dtype::F64, MethodTag::Tucker),
        (SLICES_F32, slices_payload(), Dtype::F32, MethodTag::SvdSlices),
    ] {
        let artifact = decode(bytes).unwrap();
        assert_eq!(artifact.header.method, method);
        assert_eq!(artifact.header.dtype, dtype);
        assert_eq!(artifact.header.original_shape, payload.original_shape());
        assert_eq!(artifact.payload, payload);
        assert_eq!(serialized_size(&payload, dtype), bytes.len() as u64);
        assert_eq!(artifact.header.payload_len, bytes.len() as u64 - header_len(payload.original_shape().len()));
        assert_eq!(artifact.encode().unwrap(), bytes);
    }
}

#[test]
fn fixture_reconstructions() {
    // rank-1 outer products worked by hand
    let m = decode(SVD_F32).unwrap().payload.reconstruct();
    assert_eq!(m.data(), &[1.5, -3.0, -0.75, 1.5, 2.25, -4.5]);

    let t = decode(SLICES_F32).unwrap().payload.reconstruct();
    assert_eq!(t.shape(), &[2, 2, 3]);
    assert_eq!(t.data(), &[0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.125, -0.25, 0.375]);

    // x[i,j,k] = f0[i] * (2·f1[j,0] − 1.5·f1[j,1]) * f2[k]
    let t = decode(TUCKER_F64).unwrap().payload.reconstruct();
    let f0 = [1.0, 0.5];
    let mid = [2.0, -1.5, 0.5 + 0.75];
    let f2 = [0.125, -1.0];
    for i in 0..2 {
        for j in 0..3 {
            for k in 0..2 {
                assert_eq!(t.get(&[i, j, k]), f0[i] * mid[j] * f2[k]);
            }
        }
    }
}
