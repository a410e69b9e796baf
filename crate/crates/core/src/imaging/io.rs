//! PGM (P5 write; P5 and P2 read) and plain-text vertex files.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BinaryImage, GrayImage, ImagingError, Point};

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn next_usize(&mut self, what: &str) -> Result<usize, ImagingError> {
        let tok = self
            .next_token()
            .ok_or_else(|| ImagingError::Pgm(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImagingError::Pgm(format!("bad {what}")))
    }
}

/// Decodes an 8-bit PGM (`P5` or `P2`); values are rescaled to `0..=255`.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage, ImagingError> {
    let mut t = Tokens { data, pos: 0 };
    let magic = t
        .next_token()
        .ok_or_else(|| ImagingError::Pgm("empty input".into()))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(ImagingError::Pgm("unsupported magic number".into())),
    };
    let width = t.next_usize("width")?;
    let height = t.next_usize("height")?;
    let maxval = t.next_usize("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(ImagingError::Pgm(format!("unsupported maxval {maxval}")));
    }
    let count = width * height;
    let scale = |v: usize| -> u8 { ((v.min(maxval) * 255 + maxval / 2) / maxval) as u8 };
    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = t.pos + 1;
        let raster = data
            .get(start..start + count)
            .ok_or_else(|| ImagingError::Pgm("truncated raster".into()))?;
        raster.iter().map(|&v| scale(usize::from(v))).collect()
    } else {
        (0..count)
            .map(|_| t.next_usize("sample").map(scale))
            .collect::<Result<Vec<_>, _>>()?
    };
    GrayImage::from_pixels(width, height, pixels)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage, ImagingError> {
    decode_pgm(&fs::read(path)?)
}

/// Reads a PGM as a binary image (values `>= 128` become ones).
pub fn read_binary(path: impl AsRef<Path>) -> Result<BinaryImage, ImagingError> {
    Ok(read_gray(path)?.to_binary())
}

pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<(), ImagingError> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Writes a binary image as a `{0, 255}` P5 PGM.
pub fn write_binary(path: impl AsRef<Path>, img: &BinaryImage) -> Result<(), ImagingError> {
    write_gray(path, &GrayImage::from(img))
}

/// Parses one `x y` vertex per line; blank lines and `#` comments are skipped.
pub fn parse_vertices(text: &str) -> Result<Vec<Point>, ImagingError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| ImagingError::VertexFile {
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut it = line.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("expected x"))?;
        let y: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("expected y"))?;
        if it.next().is_some() {
            return Err(err("trailing fields"));
        }
        out.push(Point::new(x, y));
    }
    Ok(out)
}

pub fn format_vertices(vertices: &[Point]) -> String {
    let mut s = String::new();
    for v in vertices {
        s.push_str(&format!("{} {}\n", v.x, v.y));
    }
    s
}

pub fn read_vertices(path: impl AsRef<Path>) -> Result<Vec<Point>, ImagingError> {
    parse_vertices(&fs::read_to_string(path)?)
}

pub fn write_vertices(path: impl AsRef<Path>, vertices: &[Point]) -> Result<(), ImagingError> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_vertices(vertices).as_bytes())?;
    Ok(())
}
