//! Grayscale PFM (`Pf`) images.
//!
//! Samples are 32-bit floats stored bottom row first. A negative scale in the
//! header marks little-endian data; files are written little-endian with
//! scale `-1.0`. Row 0 of a [`ScalarField`] is the top row of the image.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;

pub fn write_pfm<W: Write>(mut w: W, f: &ScalarField<f32>) -> Result<()> {
    write!(w, "Pf\n{} {}\n-1.0\n", f.width(), f.height())?;
    let mut buf = Vec::with_capacity(f.data().len() * 4);
    for row in f.data().chunks_exact(f.width()).rev() {
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn header_token<R: BufRead>(r: &mut R, line: &mut usize) -> Result<String> {
    let mut tok = Vec::new();
    loop {
        let mut byte = [0u8];
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Parse { line: Some(*line), message: "truncated PFM header".into() });
            }
            break;
        }
        if byte[0].is_ascii_whitespace() {
            if byte[0] == b'\n' && tok.is_empty() {
                *line += 1;
            }
            if !tok.is_empty() {
                if byte[0] == b'\n' {
                    *line += 1;
                }
                break;
            }
            continue;
        }
        tok.push(byte[0]);
    }
    String::from_utf8(tok).map_err(|_| Error::Parse { line: Some(*line), message: "non-ASCII PFM header".into() })
}

pub fn read_pfm<R: Read>(r: R) -> Result<ScalarField<f32>> {
    let mut r = BufReader::new(r);
    let mut line = 1;
    let magic = header_token(&mut r, &mut line)?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => return Err(Error::Parse { line: Some(1), message: "colour PFM is not supported".into() }),
        other => return Err(Error::Parse { line: Some(1), message: format!("bad PFM magic {other:?}") }),
    }
    let dims_line = line;
    let parse_dim = |s: String| -> Result<usize> {
        s.parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse { line: Some(dims_line), message: format!("bad PFM dimension {s:?}") })
    };
    let width = parse_dim(header_token(&mut r, &mut line)?)?;
    let height = parse_dim(header_token(&mut r, &mut line)?)?;
    let scale_line = line;
    let scale_tok = header_token(&mut r, &mut line)?;
    let scale: f32 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f32| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::Parse { line: Some(scale_line), message: format!("bad PFM scale {scale_tok:?}") })?;
    let little = scale < 0.0;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse { line: Some(dims_line), message: "PFM dimensions overflow".into() })?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 4 {
        return Err(Error::Parse {
            line: None,
            message: format!("PFM payload has {} bytes, expected {}", bytes.len(), n * 4),
        });
    }
    let mut data = vec![0f32; n];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let (file_row, col) = (i / width, i % width);
        data[(height - 1 - file_row) * width + col] = v;
    }
    ScalarField::new(width, height, data)
}

pub fn save_pfm(path: impl AsRef<Path>, f: &ScalarField<f32>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_pfm(std::io::BufWriter::new(file), f)
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<ScalarField<f32>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_pfm(file)
}

/// 8-bit binary PGM preview, linearly scaled from the field's min..max.
/// Constant fields come out black.
pub fn write_pgm_preview<W: Write>(mut w: W, f: &ScalarField<f32>) -> Result<()> {
    let (lo, hi) = (f.min_value(), f.max_value());
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::NonFinite("preview"));
    }
    let span = hi - lo;
    write!(w, "P5\n{} {}\n255\n", f.width(), f.height())?;
    let bytes: Vec<u8> = f
        .data()
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8 } else { 0 })
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn save_pgm_preview(path: impl AsRef<Path>, f: &ScalarField<f32>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_pgm_preview(std::io::BufWriter::new(file), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode(f: &ScalarField<f32>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_pfm(&mut buf, f).unwrap();
        buf
    }

    #[test]
    fn layout_is_bottom_up_little_endian() {
        let f = ScalarField::from_rows(&[vec![1.0f32, 2.0], vec![3.0, 4.0]]).unwrap();
        let buf = encode(&f);
        let header = b"Pf\n2 2\n-1.0\n";
        assert_eq!(&buf[..header.len()], header);
        let body: Vec<f32> =
            buf[header.len()..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        assert_eq!(body, vec![3.0, 4.0, 1.0, 2.0]);
    }

    #[test]
    fn reads_big_endian() {
        let mut buf = b"Pf\n2 1\n1.0\n".to_vec();
        buf.extend_from_slice(&1.5f32.to_be_bytes());
        buf.extend_from_slice(&(-2.0f32).to_be_bytes());
        let f = read_pfm(&buf[..]).unwrap();
        assert_eq!(f.data(), &[1.5, -2.0]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_pfm(&b"PF\n1 1\n-1.0\n\0\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
        assert!(read_pfm(&b"P5\n1 1\n255\n\0"[..]).is_err());
        assert!(matches!(read_pfm(&b"Pf\n1 x\n-1.0\n"[..]), Err(Error::Parse { line: Some(2), .. })));
        assert!(matches!(read_pfm(&b"Pf\n1 1\n0\n\0\0\0\0"[..]), Err(Error::Parse { line: Some(3), .. })));
        assert!(read_pfm(&b"Pf\n2 2\n-1.0\n\0\0\0\0"[..]).is_err());
        assert!(read_pfm(&b"Pf\n2"[..]).is_err());
    }

    #[test]
    fn pgm_preview_scales_min_to_max() {
        let f = ScalarField::from_rows(&[vec![-1.0f32, 0.0, 1.0]]).unwrap();
        let mut buf = Vec::new();
        write_pgm_preview(&mut buf, &f).unwrap();
        assert_eq!(buf, b"P5\n3 1\n255\n\x00\x80\xff");
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(w in 1usize..9, h in 1usize..9, bits in proptest::collection::vec(any::<u32>(), 64)) {
            let data: Vec<f32> = (0..w * h).map(|i| f32::from_bits(bits[i])).collect();
            let f = ScalarField::new(w, h, data).unwrap();
            let back = read_pfm(&encode(&f)[..]).unwrap();
            prop_assert_eq!(back.width(), w);
            prop_assert_eq!(back.height(), h);
            for (a, b) in f.data().iter().zip(back.data()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
