//! Binary PGM (`P5`) reader. Samples wider than a byte are big-endian pairs.

use std::path::Path;

use super::volume::read_bytes;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_pgm(&read_bytes(path.as_ref())?)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Matrix> {
    parse_with_depth(bytes).map(|(m, _)| m)
}

/// The image and its sample width in bytes (1, or 2 when maxval exceeds 255).
pub(crate) fn parse_with_depth(bytes: &[u8]) -> Result<(Matrix, u64)> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(b"P2") => return Err(Error::UnsupportedFormat("ASCII PGM (P2); only binary P5 is read".into())),
        _ => return Err(Error::UnsupportedFormat("not a binary PGM (missing P5 magic)".into())),
    }
    let mut pos = 2;
    let width = header_field(bytes, &mut pos, "width")?;
    let height = header_field(bytes, &mut pos, "height")?;
    let maxval = header_field(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero-sized image {width}x{height}")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(Error::MalformedHeader(format!("maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
    }
    let width_bytes = if maxval < 256 { 1 } else { 2 };
    let needed = width as u64 * height as u64 * width_bytes;
    let raster = &bytes[pos..];
    if (raster.len() as u64) < needed {
        return Err(Error::TruncatedData { needed, available: raster.len() as u64 });
    }
    let data: Vec<f64> = if width_bytes == 1 {
        raster[..needed as usize].iter().map(|&b| b as f64).collect()
    } else {
        raster[..needed as usize].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64).collect()
    };
    if let Some(v) = data.iter().find(|&&v| v > maxval as f64) {
        return Err(Error::MalformedHeader(format!("sample {v} exceeds maxval {maxval}")));
    }
    Ok((Matrix::new(height, width, data)?, width_bytes))
}

fn header_field(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize> {
    // skip whitespace and comments
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader(format!("expected {name}")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .expect("ascii digits")
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("{name} out of range")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_bytes() {
        let mut file = b"P5\n2 2\n255\n".to_vec();
        file.extend_from_slice(&[0, 255, 255, 0]);
        let m = parse_pgm(&file).unwrap();
        assert_eq!(m, Matrix::from_rows(&[&[0.0, 255.0], &[255.0, 0.0]]).unwrap());
    }

    #[test]
    fn sixteen_bit_big_endian_with_comments() {
        let mut file = b"P5 # made by hand\n3 1\n# second comment\n65535\n".to_vec();
        file.extend_from_slice(&[0x01, 0x02, 0xff, 0xff, 0x00, 0x07]);
        let m = parse_pgm(&file).unwrap();
        assert_eq!(m.data(), &[258.0, 65535.0, 7.0]);
        assert_eq!((m.rows(), m.cols()), (1, 3));
    }

    #[test]
    fn rejects_ascii_and_malformed() {
        assert!(matches!(parse_pgm(b"P2\n1 1\n255\n0\n"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(parse_pgm(b"P5\nx 1\n255\n\0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse_pgm(b"P5\n1 1\n70000\n\0\0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse_pgm(b"P5\n2 2\n255\n\0\0\0"), Err(Error::TruncatedData { .. })));
        assert!(matches!(parse_pgm(b"P5\n1 1\n100\n\xff"), Err(Error::MalformedHeader(_))));
    }
}
