use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tprs_core::container::{decode, encode, MethodTag};
use tprs_core::ingest::{generate_phantom, load_input, quantize, read_bytes, save_volume, LoadedInput, PhantomSpec};
use tprs_core::metrics::{EvaluationReport, Method};
use tprs_core::report::{cr_rmse_tsv, rank_quality_tsv, read_csv, render_svg, write_csv};
use tprs_core::sweep::{
    compress as compress_point, expand_tucker_ranks, format_ranks, parse_ranks, run_sweep, RankSpec, SweepConfig,
    DEFAULT_SVD_RANKS, DEFAULT_TUCKER_RANKS,
};
use tprs_core::tucker::TuckerMethod;
use tprs_core::{DenseTensor, Error, Result};

use crate::{
    CompressArgs, DecompressArgs, EvaluateArgs, MethodArg, PhantomArgs, PhantomOptions, PlotdataArgs, SweepArgs,
    SweepMethodArg, TuckerArgs,
};

/// Bytes per sample charged to a phantom generated in memory.
const PHANTOM_SAMPLE_BYTES: u64 = 4;

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(e).context(format!("writing {}", path.display())))
}

fn load(path: &Path) -> Result<LoadedInput> {
    load_input(path).map_err(|e| e.context(format!("reading {}", path.display())))
}

fn tucker_method(args: &TuckerArgs) -> TuckerMethod {
    if args.hosvd {
        TuckerMethod::Hosvd
    } else {
        TuckerMethod::default()
    }
}

fn single_rank(s: &str) -> Result<usize> {
    match parse_ranks(s)?.as_slice() {
        [k] => Ok(*k),
        other => Err(Error::InvalidParameter(format!("svd takes one rank, got {other:?}"))),
    }
}

pub fn compress(args: CompressArgs) -> Result<()> {
    let input = load(&args.input)?;
    let shape = input.tensor.shape().to_vec();
    let point = match args.method {
        MethodArg::Svd => RankSpec::Svd(single_rank(&args.ranks)?),
        MethodArg::Tucker => {
            RankSpec::Tucker(expand_tucker_ranks(&shape, &parse_ranks(&args.ranks)?, args.tucker.full_time_rank)?)
        }
    };
    let payload = compress_point(&input.tensor, &point, tucker_method(&args.tucker))?;
    let bytes = encode(&payload, args.dtype)?;
    write_file(&args.out, &bytes)?;
    let compressed = bytes.len() as u64;
    println!(
        "original_bytes={} compressed_bytes={} compression_ratio={}",
        input.original_bytes,
        compressed,
        input.original_bytes as f64 / compressed as f64
    );
    Ok(())
}

pub fn decompress(args: DecompressArgs) -> Result<()> {
    let artifact = decode(&read_bytes(&args.input)?).map_err(|e| e.context(format!("decoding {}", args.input.display())))?;
    let volume = quantize(&artifact.payload.reconstruct(), args.volume_dtype);
    save_volume(&volume, &args.out, args.volume_dtype).map_err(|e| e.context(format!("writing {}", args.out.display())))
}

fn emit_csv(rows: &[EvaluationReport], out: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    match out {
        Some(path) => write_file(path, &buf),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&buf)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let input = load(&args.original)?;
    let bytes = read_bytes(&args.artifact)?;
    let artifact = decode(&bytes).map_err(|e| e.context(format!("decoding {}", args.artifact.display())))?;
    let header = &artifact.header;
    if header.original_shape != input.tensor.shape() {
        return Err(Error::ShapeMismatch(format!(
            "artifact shape {:?} differs from original {:?}",
            header.original_shape,
            input.tensor.shape()
        )));
    }
    let (method, ranks) = match header.method {
        MethodTag::Svd | MethodTag::SvdSlices => (Method::Svd, vec![header.rank_spec[0]]),
        MethodTag::Tucker => (Method::Tucker, header.rank_spec.clone()),
    };
    let report = EvaluationReport::evaluate(
        method,
        ranks,
        &input.tensor,
        &artifact.payload.reconstruct(),
        input.original_bytes,
        bytes.len() as u64,
        args.ssim,
    )?;
    emit_csv(&[report], args.out.as_deref())
}

fn phantom_spec(opts: &PhantomOptions) -> Result<PhantomSpec> {
    let shape = opts
        .shape
        .split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad shape {:?}", opts.shape))))
        .collect::<Result<Vec<_>>>()?;
    let spec = PhantomSpec {
        shape,
        seed: opts.seed,
        blob_count: opts.blobs,
        temporal_frequency: opts.frequency,
        noise_sigma: opts.noise,
    };
    spec.validate()?;
    Ok(spec)
}

/// Comma-separated list; tucker entries are expanded to the input order.
fn rank_points(list: &str, method: Method, shape: &[usize], full_time_rank: bool) -> Result<Vec<RankSpec>> {
    list.split(',')
        .filter(|e| !e.trim().is_empty())
        .map(|entry| match method {
            Method::Svd => Ok(RankSpec::Svd(single_rank(entry)?)),
            Method::Tucker => Ok(RankSpec::Tucker(expand_tucker_ranks(shape, &parse_ranks(entry)?, full_time_rank)?)),
        })
        .collect()
}

fn default_points(method: Method, shape: &[usize], full_time_rank: bool) -> Result<Vec<RankSpec>> {
    let defaults: &[usize] = match method {
        Method::Svd => &DEFAULT_SVD_RANKS,
        Method::Tucker => &DEFAULT_TUCKER_RANKS,
    };
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &r in defaults {
        let point = match method {
            Method::Svd => RankSpec::Svd(r),
            Method::Tucker => RankSpec::Tucker(expand_tucker_ranks(shape, &[r], full_time_rank)?),
        };
        if point.validate(shape).is_ok() {
            points.push(point);
        } else {
            dropped.push(r);
        }
    }
    if !dropped.is_empty() {
        eprintln!("note: default {method} ranks {dropped:?} exceed input shape {shape:?} and were skipped");
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter(format!("no default {method} rank fits input shape {shape:?}")));
    }
    Ok(points)
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let (tensor, original_bytes): (DenseTensor, u64) = match &args.input {
        Some(path) => {
            let input = load(path)?;
            (input.tensor, input.original_bytes)
        }
        None => {
            let t = generate_phantom(&phantom_spec(&args.phantom)?)?;
            let bytes = t.len() as u64 * PHANTOM_SAMPLE_BYTES;
            (t, bytes)
        }
    };
    let shape = tensor.shape().to_vec();
    let methods: &[Method] = match args.method {
        SweepMethodArg::Svd => &[Method::Svd],
        SweepMethodArg::Tucker => &[Method::Tucker],
        SweepMethodArg::Both => &[Method::Svd, Method::Tucker],
    };
    let mut points = Vec::new();
    for &method in methods {
        let specific = match method {
            Method::Svd => args.svd_ranks.as_deref(),
            Method::Tucker => args.tucker_ranks.as_deref(),
        };
        points.extend(match specific.or(args.ranks.as_deref()) {
            Some(list) => rank_points(list, method, &shape, args.tucker.full_time_rank)?,
            None => default_points(method, &shape, args.tucker.full_time_rank)?,
        });
    }
    let config = SweepConfig { points, dtype: args.dtype, ssim: args.ssim, tucker: tucker_method(&args.tucker) };
    let rows = run_sweep(&tensor, original_bytes, &config)?;
    emit_csv(&rows, args.out.as_deref())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.txt");
    PathBuf::from(name)
}

pub fn phantom(args: PhantomArgs) -> Result<()> {
    let spec = phantom_spec(&args.spec)?;
    let t = quantize(&generate_phantom(&spec)?, args.volume_dtype);
    save_volume(&t, &args.out, args.volume_dtype).map_err(|e| e.context(format!("writing {}", args.out.display())))?;
    let meta = format!(
        "shape={}\nseed={}\nblobs={}\nfrequency={}\nnoise={}\nvolume_dtype={}\n",
        format_ranks(&spec.shape),
        spec.seed,
        spec.blob_count,
        spec.temporal_frequency,
        spec.noise_sigma,
        args.volume_dtype.name()
    );
    write_file(&sidecar_path(&args.out), meta.as_bytes())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn plotdata(args: PlotdataArgs) -> Result<()> {
    let file = fs::File::open(&args.input).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingFile(args.input.clone()),
        _ => Error::Io(e),
    })?;
    let rows = read_csv(file).map_err(|e| e.context(format!("reading {}", args.input.display())))?;
    write_file(&with_suffix(&args.out, ".cr_rmse.tsv"), cr_rmse_tsv(&rows).as_bytes())?;
    write_file(&with_suffix(&args.out, ".rank_quality.tsv"), rank_quality_tsv(&rows).as_bytes())?;
    if args.svg {
        write_file(&with_suffix(&args.out, ".svg"), render_svg(&rows).as_bytes())?;
    }
    Ok(())
}
