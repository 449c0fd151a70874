//! 16-bit PGM and float PFM images.
//!
//! PGM files are binary (`P5`) with maxval 65535 and big-endian samples.
//! PFM files are single channel (`Pf`) with a negative scale, i.e.
//! little-endian floats, stored bottom row first as the format requires.

use std::io::{self, BufRead, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub width: u32,
    pub height: u32,
    /// Row-major, top row first.
    pub data: Vec<T>,
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn check_len(width: u32, height: u32, len: usize) -> io::Result<()> {
    if width as usize * height as usize != len {
        return Err(invalid(format!("{width}×{height} image with {len} samples")));
    }
    Ok(())
}

pub fn write_pgm16(w: &mut impl Write, width: u32, height: u32, data: &[u16]) -> io::Result<()> {
    check_len(width, height, data.len())?;
    write!(w, "P5\n{width} {height}\n65535\n")?;
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_be_bytes()).collect();
    w.write_all(&bytes)
}

/// Binary masks are written as 0 / 65535.
pub fn write_mask_pgm(w: &mut impl Write, width: u32, height: u32, bits: &[bool]) -> io::Result<()> {
    let data: Vec<u16> = bits.iter().map(|&b| if b { u16::MAX } else { 0 }).collect();
    write_pgm16(w, width, height, &data)
}

pub fn write_pfm(w: &mut impl Write, width: u32, height: u32, data: &[f32]) -> io::Result<()> {
    check_len(width, height, data.len())?;
    write!(w, "Pf\n{width} {height}\n-1.0\n")?;
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for row in data.chunks(width as usize).rev() {
        for v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&bytes)
}

/// Reads whitespace-separated header tokens; the single whitespace byte
/// after the last token is consumed.
fn header_tokens(r: &mut impl BufRead, n: usize) -> io::Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut byte = [0u8; 1];
    while tokens.len() < n {
        r.read_exact(&mut byte)?;
        let c = byte[0] as char;
        if c == '#' && cur.is_empty() {
            let mut skip = String::new();
            r.read_line(&mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    Ok(tokens)
}

fn dims(tokens: &[String]) -> io::Result<(u32, u32)> {
    let parse = |s: &String| s.parse::<u32>().map_err(|_| invalid(format!("bad dimension {s:?}")));
    Ok((parse(&tokens[1])?, parse(&tokens[2])?))
}

pub fn read_pgm16(r: &mut impl BufRead) -> io::Result<Image<u16>> {
    let t = header_tokens(r, 4)?;
    if t[0] != "P5" || t[3] != "65535" {
        return Err(invalid("expected a 16-bit P5 image"));
    }
    let (width, height) = dims(&t)?;
    let mut bytes = vec![0u8; width as usize * height as usize * 2];
    r.read_exact(&mut bytes)?;
    let data = bytes.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect();
    Ok(Image { width, height, data })
}

pub fn read_pfm(r: &mut impl BufRead) -> io::Result<Image<f32>> {
    let t = header_tokens(r, 4)?;
    if t[0] != "Pf" {
        return Err(invalid("expected a single-channel Pf image"));
    }
    let (width, height) = dims(&t)?;
    let scale: f64 = t[3].parse().map_err(|_| invalid("bad scale"))?;
    let mut bytes = vec![0u8; width as usize * height as usize * 4];
    r.read_exact(&mut bytes)?;
    let sample = |b: &[u8]| {
        let b = [b[0], b[1], b[2], b[3]];
        if scale < 0.0 {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let rows: Vec<Vec<f32>> = bytes
        .chunks_exact(width as usize * 4)
        .map(|row| row.chunks_exact(4).map(sample).collect())
        .collect();
    let data = rows.into_iter().rev().flatten().collect();
    Ok(Image { width, height, data })
}
