//! Sweep CSV (schema version 1) and plot-ready series derived from it.
//!
//! Columns, in order: `method, ranks, original_bytes, compressed_bytes,
//! compression_ratio, mse, psnr_db, rmse_abs, rmse_rel, ssim`. `ranks` is
//! `k` for svd and `r1xr2x…` for tucker; `psnr_db` is `inf` for a lossless
//! row; `ssim` is empty when it was not computed.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{EvaluationReport, Method};
use crate::sweep::{format_ranks, parse_ranks};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 10] = [
    "method",
    "ranks",
    "original_bytes",
    "compressed_bytes",
    "compression_ratio",
    "mse",
    "psnr_db",
    "rmse_abs",
    "rmse_rel",
    "ssim",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    method: String,
    ranks: String,
    original_bytes: u64,
    compressed_bytes: u64,
    compression_ratio: f64,
    mse: f64,
    psnr_db: f64,
    rmse_abs: f64,
    rmse_rel: f64,
    ssim: Option<f64>,
}

pub fn write_csv<W: Write>(rows: &[EvaluationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            method: r.method.to_string(),
            ranks: format_ranks(&r.ranks),
            original_bytes: r.original_bytes,
            compressed_bytes: r.compressed_bytes,
            compression_ratio: r.compression_ratio,
            mse: r.mse,
            psnr_db: r.psnr_db,
            rmse_abs: r.rmse_abs,
            rmse_rel: r.rmse_rel,
            ssim: r.ssim,
        })?;
    }
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<EvaluationReport>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::UnsupportedFormat(format!(
            "csv header {:?} does not match sweep schema v{CSV_SCHEMA_VERSION}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for record in r.deserialize() {
        let row: CsvRow = record?;
        rows.push(EvaluationReport {
            method: row.method.parse()?,
            ranks: parse_ranks(&row.ranks)?,
            original_bytes: row.original_bytes,
            compressed_bytes: row.compressed_bytes,
            compression_ratio: row.compression_ratio,
            mse: row.mse,
            psnr_db: row.psnr_db,
            rmse_abs: row.rmse_abs,
            rmse_rel: row.rmse_rel,
            ssim: row.ssim,
        });
    }
    if rows.is_empty() {
        return Err(Error::UnsupportedFormat("csv has no data rows".into()));
    }
    Ok(rows)
}

/// `(compression_ratio, rmse_abs)` points of one method, in row order.
pub fn cr_rmse_series(rows: &[EvaluationReport], method: Method) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.method == method).map(|r| (r.compression_ratio, r.rmse_abs)).collect()
}

/// Compression ratio vs. RMSE, one row per sweep row: `method cr rmse_abs`.
pub fn cr_rmse_tsv(rows: &[EvaluationReport]) -> String {
    let mut out = String::from("method\tcompression_ratio\trmse_abs\n");
    for method in [Method::Tucker, Method::Svd] {
        for (cr, rmse) in cr_rmse_series(rows, method) {
            writeln!(out, "{method}\t{cr}\t{rmse}").expect("writing to a String");
        }
    }
    out
}

/// Rank vs. size and quality: `method ranks compressed_bytes mse psnr_db`.
pub fn rank_quality_tsv(rows: &[EvaluationReport]) -> String {
    let mut out = String::from("method\tranks\tcompressed_bytes\tmse\tpsnr_db\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", r.method, format_ranks(&r.ranks), r.compressed_bytes, r.mse, r.psnr_db)
            .expect("writing to a String");
    }
    out
}

/// A Tucker point and an SVD point whose compression ratios are close.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub tucker_cr: f64,
    pub tucker_rmse: f64,
    pub svd_cr: f64,
    pub svd_rmse: f64,
}

impl MatchedPair {
    pub fn tucker_wins(&self) -> bool {
        self.tucker_rmse <= self.svd_rmse
    }
}

/// Every (tucker, svd) pair whose compression ratios differ by at most
/// `tolerance`, relative to the smaller ratio.
pub fn matched_pairs(rows: &[EvaluationReport], tolerance: f64) -> Vec<MatchedPair> {
    let tucker = cr_rmse_series(rows, Method::Tucker);
    let svd = cr_rmse_series(rows, Method::Svd);
    let mut pairs = Vec::new();
    for &(tucker_cr, tucker_rmse) in &tucker {
        for &(svd_cr, svd_rmse) in &svd {
            if (tucker_cr - svd_cr).abs() <= tolerance * tucker_cr.min(svd_cr) {
                pairs.push(MatchedPair { tucker_cr, tucker_rmse, svd_cr, svd_rmse });
            }
        }
    }
    pairs
}

/// Scatter plot of RMSE against compression ratio (log-scaled x axis), Tucker
/// as circles and SVD as squares.
pub fn render_svg(rows: &[EvaluationReport]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.compression_ratio.max(1e-12).ln(), r.rmse_abs)).collect();
    let (xmin, xmax) = bounds(points.iter().map(|p| p.0));
    let (ymin, ymax) = bounds(points.iter().map(|p| p.1).chain(std::iter::once(0.0)));
    let sx = |x: f64| PAD + (x - xmin) / (xmax - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">compression ratio (log scale; {:.3} to {:.3})</text>"#,
        W / 2.0,
        H - 20.0,
        xmin.exp(),
        xmax.exp()
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">RMSE ({:.3} to {:.3})</text>"#,
        H / 2.0,
        H / 2.0,
        ymin,
        ymax
    );
    for (r, &(x, y)) in rows.iter().zip(&points) {
        let (cx, cy) = (sx(x), sy(y));
        match r.method {
            Method::Tucker => {
                let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="blue"/>"#);
            }
            Method::Svd => {
                let _ = writeln!(svg, r#"<rect x="{:.2}" y="{:.2}" width="9" height="9" fill="red"/>"#, cx - 4.5, cy - 4.5);
            }
        }
    }
    let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="5" fill="blue"/><text x="{}" y="{}" font-size="12">tucker</text>"#, W - 150.0, PAD, W - 140.0, PAD + 4.0);
    let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="9" height="9" fill="red"/><text x="{}" y="{}" font-size="12">svd</text>"#, W - 154.5, PAD + 15.5, W - 140.0, PAD + 24.0);
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, ranks: Vec<usize>, compressed: u64, rmse: f64) -> EvaluationReport {
        EvaluationReport {
            method,
            ranks,
            original_bytes: 1_944_474,
            compressed_bytes: compressed,
            compression_ratio: 1_944_474.0 / compressed as f64,
            mse: rmse * rmse,
            psnr_db: 20.0,
            rmse_abs: rmse,
            rmse_rel: 0.1,
            ssim: None,
        }
    }

    #[test]
    fn csv_round_trip_and_inf() {
        let mut a = row(Method::Tucker, vec![5, 5, 5], 3836, 103.83);
        a.ssim = Some(0.51);
        let mut b = row(Method::Svd, vec![5], 166_957, 87.97);
        b.psnr_db = f64::INFINITY;
        let mut buf = Vec::new();
        write_csv(&[a.clone(), b.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_COLUMNS.join(",")));
        assert!(text.contains(",inf,"));
        assert!(text.contains("tucker,5x5x5,"));
        assert_eq!(read_csv(&buf[..]).unwrap(), vec![a, b]);
    }

    #[test]
    fn csv_rejects_empty_and_foreign() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert!(read_csv(&buf[..]).is_err());
        assert!(matches!(read_csv(&b"a,b\n1,2\n"[..]), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn single_row_series() {
        let r = row(Method::Svd, vec![5], 166_957, 87.97);
        let tsv = cr_rmse_tsv(std::slice::from_ref(&r));
        assert_eq!(tsv.lines().count(), 2);
        assert_eq!(tsv.lines().nth(1).unwrap(), format!("svd\t{}\t{}", r.compression_ratio, r.rmse_abs));
        assert!(render_svg(&[r]).contains("<rect x="));
    }

    #[test]
    fn matched_pairs_respect_tolerance() {
        let rows = vec![
            row(Method::Tucker, vec![4, 4, 4], 1000, 1.0),
            row(Method::Svd, vec![2], 1050, 2.0),
            row(Method::Svd, vec![3], 1200, 0.5),
        ];
        let pairs = matched_pairs(&rows, 0.10);
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].tucker_wins());
    }
}
