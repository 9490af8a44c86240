//! Rank sweeps: compress at each requested rank, round-trip through the
//! container, and score the reconstruction.

use std::fmt;
use std::str::FromStr;

use crate::container::{decode, encode, Dtype, Payload};
use crate::error::{Error, Result};
use crate::metrics::{EvaluationReport, Method};
use crate::svd_codec::{compress_svd, compress_svd_slices};
use crate::tensor::DenseTensor;
use crate::tucker::{decompose, validate_ranks, TuckerMethod};

pub const DEFAULT_SVD_RANKS: [usize; 8] = [5, 10, 20, 30, 40, 50, 75, 100];
pub const DEFAULT_TUCKER_RANKS: [usize; 7] = [5, 10, 20, 30, 40, 50, 75];

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankSpec {
    /// Matrix SVD for order-2 inputs, per-slice SVD for order 3 and 4.
    Svd(usize),
    Tucker(Vec<usize>),
}

impl RankSpec {
    pub fn method(&self) -> Method {
        match self {
            RankSpec::Svd(_) => Method::Svd,
            RankSpec::Tucker(_) => Method::Tucker,
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        match self {
            RankSpec::Svd(k) => vec![*k],
            RankSpec::Tucker(r) => r.clone(),
        }
    }

    pub fn validate(&self, shape: &[usize]) -> Result<()> {
        match self {
            RankSpec::Svd(k) => {
                let d = shape.len();
                if !(2..=4).contains(&d) {
                    return Err(Error::InvalidParameter(format!("svd needs an order-2 to order-4 input, got order {d}")));
                }
                let max = shape[d - 2].min(shape[d - 1]);
                if *k == 0 || *k > max {
                    return Err(Error::RankOutOfRange { mode: d - 2, rank: *k, max });
                }
                Ok(())
            }
            RankSpec::Tucker(r) => validate_ranks(shape, r),
        }
    }
}

/// Formats ranks the way the CSV stores them: `5` or `5x5x5`.
pub fn format_ranks(ranks: &[usize]) -> String {
    ranks.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

pub fn parse_ranks(s: &str) -> Result<Vec<usize>> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(['x', ','])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad rank {p:?} in {s:?}")))
        })
        .collect()
}

impl fmt::Display for RankSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.method(), format_ranks(&self.ranks()))
    }
}

impl FromStr for RankSpec {
    type Err = Error;
    /// `svd:5` or `tucker:5x5x5`.
    fn from_str(s: &str) -> Result<Self> {
        let (method, ranks) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("expected method:ranks, got {s:?}")))?;
        let ranks = parse_ranks(ranks)?;
        match method.parse::<Method>()? {
            Method::Svd if ranks.len() == 1 => Ok(RankSpec::Svd(ranks[0])),
            Method::Svd => Err(Error::InvalidParameter(format!("svd takes one rank, got {ranks:?}"))),
            Method::Tucker => Ok(RankSpec::Tucker(ranks)),
        }
    }
}

/// Expands a Tucker rank tuple to the input order.
///
/// A single value `r` becomes `[r; d]`. With `full_time_rank` on an order-4
/// input, a tuple covering the three spatial modes gets the time mode (mode 0)
/// prepended at full rank, so `[r1, r2, r3]` becomes `[T, r1, r2, r3]`.
pub fn expand_tucker_ranks(shape: &[usize], ranks: &[usize], full_time_rank: bool) -> Result<Vec<usize>> {
    let d = shape.len();
    let time = full_time_rank && d == 4;
    let spatial = if time { d - 1 } else { d };
    let body = match ranks.len() {
        1 => vec![ranks[0]; spatial],
        n if n == spatial => ranks.to_vec(),
        n if n == d && !time => ranks.to_vec(),
        n => {
            return Err(Error::InvalidParameter(format!(
                "{n} ranks cannot describe an order-{d} input{}",
                if time { " with full time rank" } else { "" }
            )))
        }
    };
    Ok(if time { std::iter::once(shape[0]).chain(body).collect() } else { body })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub points: Vec<RankSpec>,
    pub dtype: Dtype,
    pub ssim: bool,
    pub tucker: TuckerMethod,
}

impl SweepConfig {
    pub fn new(points: Vec<RankSpec>) -> Self {
        Self { points, dtype: Dtype::default(), ssim: true, tucker: TuckerMethod::default() }
    }

    /// Checks every point against `shape`; nothing is computed.
    pub fn validate(&self, shape: &[usize]) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidParameter("empty rank list".into()));
        }
        self.points.iter().try_for_each(|p| p.validate(shape))
    }
}

/// Compresses `input` at `point`.
pub fn compress(input: &DenseTensor, point: &RankSpec, tucker: TuckerMethod) -> Result<Payload> {
    point.validate(input.shape())?;
    match point {
        RankSpec::Svd(k) if input.order() == 2 => Ok(Payload::Svd(compress_svd(&input.to_matrix()?, *k)?)),
        RankSpec::Svd(k) => Ok(Payload::SvdSlices(compress_svd_slices(input, *k)?)),
        RankSpec::Tucker(r) => Ok(Payload::Tucker(decompose(input, r, tucker)?)),
    }
}

/// Evaluates one point: compress, encode, decode, reconstruct, score.
pub fn evaluate_point(
    input: &DenseTensor,
    original_bytes: u64,
    point: &RankSpec,
    config: &SweepConfig,
) -> Result<EvaluationReport> {
    let payload = compress(input, point, config.tucker)?;
    let bytes = encode(&payload, config.dtype)?;
    let reconstructed = decode(&bytes)?.payload.reconstruct();
    EvaluationReport::evaluate(
        point.method(),
        point.ranks(),
        input,
        &reconstructed,
        original_bytes,
        bytes.len() as u64,
        config.ssim,
    )
}

/// Runs the whole sweep; rows come back in configured order. All points are
/// validated before any compression starts.
pub fn run_sweep(input: &DenseTensor, original_bytes: u64, config: &SweepConfig) -> Result<Vec<EvaluationReport>> {
    config.validate(input.shape())?;
    config
        .points
        .iter()
        .map(|p| evaluate_point(input, original_bytes, p, config).map_err(|e| e.context(format!("sweep point {p}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_tensor, rng};

    #[test]
    fn rank_parsing() {
        assert_eq!(parse_ranks("5x5x5").unwrap(), vec![5, 5, 5]);
        assert_eq!(parse_ranks("[5, 6, 7]").unwrap(), vec![5, 6, 7]);
        assert!(parse_ranks("5xa").is_err());
        assert_eq!("tucker:2x3x4".parse::<RankSpec>().unwrap(), RankSpec::Tucker(vec![2, 3, 4]));
        assert_eq!("svd:7".parse::<RankSpec>().unwrap(), RankSpec::Svd(7));
        assert!("svd:7x7".parse::<RankSpec>().is_err());
        assert!("cp:3".parse::<RankSpec>().is_err());
        assert_eq!(format_ranks(&[5, 5, 5]), "5x5x5");
    }

    #[test]
    fn tucker_rank_expansion() {
        assert_eq!(expand_tucker_ranks(&[8, 9, 10], &[4], false).unwrap(), vec![4, 4, 4]);
        assert_eq!(expand_tucker_ranks(&[6, 8, 9, 10], &[4], false).unwrap(), vec![4, 4, 4, 4]);
        assert_eq!(expand_tucker_ranks(&[6, 8, 9, 10], &[4], true).unwrap(), vec![6, 4, 4, 4]);
        assert_eq!(expand_tucker_ranks(&[6, 8, 9, 10], &[2, 3, 4], true).unwrap(), vec![6, 2, 3, 4]);
        assert!(expand_tucker_ranks(&[6, 8, 9, 10], &[2, 3, 4], false).is_err());
        assert!(expand_tucker_ranks(&[8, 9, 10], &[2, 3], false).is_err());
    }

    #[test]
    fn validation_happens_before_work() {
        let t = random_tensor(&mut rng(91), &[6, 6, 6]);
        let config = SweepConfig::new(vec![RankSpec::Tucker(vec![2, 2, 2]), RankSpec::Svd(7)]);
        assert!(matches!(run_sweep(&t, 216, &config), Err(Error::RankOutOfRange { rank: 7, .. })));
        assert!(SweepConfig::new(vec![]).validate(&[2, 2]).is_err());
    }

    #[test]
    fn full_rank_point_is_lossless() {
        let t = random_tensor(&mut rng(92), &[5, 6, 7]);
        let mut config = SweepConfig::new(vec![RankSpec::Tucker(vec![5, 6, 7])]);
        config.dtype = Dtype::F64;
        config.ssim = false;
        let rows = run_sweep(&t, 5 * 6 * 7 * 8, &config).unwrap();
        assert!(rows[0].rmse_rel < 1e-9);
    }

    #[test]
    fn matrix_and_sliced_svd_paths() {
        let m = random_tensor(&mut rng(93), &[9, 8]);
        let p = compress(&m, &RankSpec::Svd(3), TuckerMethod::Hosvd).unwrap();
        assert!(matches!(p, Payload::Svd(_)));
        let v = random_tensor(&mut rng(94), &[2, 9, 8]);
        let p = compress(&v, &RankSpec::Svd(3), TuckerMethod::Hosvd).unwrap();
        assert!(matches!(p, Payload::SvdSlices(_)));
    }
}
