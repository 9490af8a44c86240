//! Lossy low-rank compression of matrices, volumes and 4-D time series.
//!
//! Two codecs share one dense tensor substrate:
//!
//! * [`svd_codec`]: truncated SVD of a matrix, or of every 2-D slice of a volume;
//! * [`tucker`]: Tucker decomposition (HOSVD, refined by HOOI) of order-3/4 tensors.
//!
//! Compressed factors are serialized by [`container`]; the byte length of that
//! serialization is the compressed size used for every compression ratio.
//! [`metrics`] scores reconstructions, [`sweep`] runs rank sweeps and [`report`]
//! turns them into CSV and plot data.

pub mod container;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod report;
pub mod svd_codec;
pub mod sweep;
pub mod tensor;
pub mod tucker;

#[cfg(test)]
mod testutil;

pub use container::{decode, encode, serialized_size, CompressedArtifact, Dtype, Payload};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{leading_left_singular_vectors, thin_svd, SvdTriple};
pub use metrics::{EvaluationReport, Method, SsimParams};
pub use svd_codec::{compress_svd, compress_svd_slices, reconstruct_svd, SlicedSvd, SvdFactors};
pub use tensor::{fold, frobenius_norm, mode_n_product, unfold, DenseTensor, Matrix};
pub use tucker::{hooi, hosvd, reconstruct_tucker, select_ranks_by_variance, TuckerFactors, TuckerMethod};
