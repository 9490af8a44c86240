use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tprs_core::container::Dtype;
use tprs_core::ingest::VolumeDtype;
use tprs_core::ErrorKind;

mod commands;

/// Low-rank compression of images, volumes and 4-D series with truncated SVD
/// and Tucker decompositions.
///
/// Compressed size always means the byte length of the `.tprs` container
/// (header plus factors at the chosen dtype), never the size of an image file
/// written from the reconstruction. Original size is the raw sample data of
/// the input: sample count times stored width (4 bytes per sample for
/// phantoms generated in memory).
///
/// Exit status: 0 success, 1 invalid arguments, 2 I/O or format error,
/// 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "tprs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a volume or PGM image into a .tprs container.
    Compress(CompressArgs),
    /// Reconstruct a .tprs container into a .tvol volume.
    Decompress(DecompressArgs),
    /// Score a .tprs container against its original; prints one CSV row.
    Evaluate(EvaluateArgs),
    /// Compress at each rank of a list and write one CSV row per rank.
    Sweep(SweepArgs),
    /// Generate a synthetic phantom volume.
    Phantom(PhantomArgs),
    /// Turn a sweep CSV into tab-separated plot series (and optionally SVG).
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Svd,
    Tucker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMethodArg {
    Svd,
    Tucker,
    Both,
}

#[derive(Debug, Args)]
struct TuckerArgs {
    /// Use plain HOSVD instead of HOSVD refined by HOOI.
    #[arg(long)]
    hosvd: bool,
    /// For order-4 inputs, keep the time mode (mode 0) at full rank; ranks
    /// then describe the three spatial modes.
    #[arg(long)]
    full_time_rank: bool,
}

#[derive(Debug, Args)]
struct CompressArgs {
    /// Input .tvol volume or binary PGM.
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// `k` for svd; `r` or `r1xr2x...` for tucker.
    #[arg(long)]
    ranks: String,
    /// Payload sample precision.
    #[arg(long, default_value = "f32", value_parser = parse_dtype)]
    dtype: Dtype,
    #[command(flatten)]
    tucker: TuckerArgs,
    /// Output .tprs path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    /// Input .tprs container.
    input: PathBuf,
    /// Sample type of the written volume.
    #[arg(long, default_value = "f32", value_parser = parse_volume_dtype)]
    volume_dtype: VolumeDtype,
    /// Output .tvol path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// The uncompressed .tvol volume or PGM.
    original: PathBuf,
    /// A .tprs container made from it.
    artifact: PathBuf,
    /// Also compute SSIM (mean over 2-D slices for volumes).
    #[arg(long)]
    ssim: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Input .tvol volume or PGM; without it a phantom is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    method: SweepMethodArg,
    /// Comma-separated rank list for the selected method(s). Tucker entries
    /// are `r` (same rank on every mode) or `r1xr2x...`. Defaults:
    /// svd 5,10,20,30,40,50,75,100; tucker 5,10,20,30,40,50,75, restricted
    /// to the ranks the input can hold.
    #[arg(long)]
    ranks: Option<String>,
    /// Rank list for the svd rows only (overrides --ranks).
    #[arg(long)]
    svd_ranks: Option<String>,
    /// Rank list for the tucker rows only (overrides --ranks).
    #[arg(long)]
    tucker_ranks: Option<String>,
    #[arg(long, default_value = "f32", value_parser = parse_dtype)]
    dtype: Dtype,
    /// Add an SSIM column (mean over 2-D slices for volumes).
    #[arg(long)]
    ssim: bool,
    #[command(flatten)]
    tucker: TuckerArgs,
    #[command(flatten)]
    phantom: PhantomOptions,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhantomOptions {
    /// Phantom shape, `I1xI2xI3` or `TxI1xI2xI3`.
    #[arg(long, default_value = "32x32x32")]
    shape: String,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    blobs: usize,
    /// Cycles of amplitude modulation over the series (order 4 only).
    #[arg(long, default_value_t = 1.0)]
    frequency: f64,
    /// Standard deviation of additive Gaussian noise, relative to a unit bump.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Debug, Args)]
struct PhantomArgs {
    #[command(flatten)]
    spec: PhantomOptions,
    #[arg(long, default_value = "f32", value_parser = parse_volume_dtype)]
    volume_dtype: VolumeDtype,
    /// Output .tvol path; the spec is echoed to `<out>.meta.txt`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotdataArgs {
    /// Sweep CSV.
    input: PathBuf,
    /// Output prefix: writes `<out>.cr_rmse.tsv` and `<out>.rank_quality.tsv`.
    #[arg(long)]
    out: PathBuf,
    /// Also render `<out>.svg`.
    #[arg(long)]
    svg: bool,
}

fn parse_dtype(s: &str) -> Result<Dtype, String> {
    s.parse().map_err(|e: tprs_core::Error| e.to_string())
}

fn parse_volume_dtype(s: &str) -> Result<VolumeDtype, String> {
    s.parse().map_err(|e: tprs_core::Error| e.to_string())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 1,
        ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(u8::from(usage_error));
        }
    };
    let result = match cli.command {
        Command::Compress(args) => commands::compress(args),
        Command::Decompress(args) => commands::decompress(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Phantom(args) => commands::phantom(args),
        Command::Plotdata(args) => commands::plotdata(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
