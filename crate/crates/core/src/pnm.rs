//! Netpbm import and export: PGM (P2/P5) for grayscale, PBM (P1/P4) for binary.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::Input;
use crate::raster::{BinaryImage, GrayImage};

/// Read a PGM or PBM file, or a glyph text grid (rows of `0`/`1`) as binary.
pub fn read(path: impl AsRef<Path>) -> Result<Input> {
    let data = fs::read(path)?;
    decode(&data)
}

pub fn decode(data: &[u8]) -> Result<Input> {
    let first = data.iter().find(|b| !b.is_ascii_whitespace());
    if matches!(first, Some(b'0' | b'1')) {
        return decode_bit_grid(data).map(Input::Binary);
    }
    let mut cur = Cursor { data, pos: 0 };
    let magic = cur.token()?;
    match magic.as_str() {
        "P1" => {
            let (w, h) = (cur.number()?, cur.number()?);
            let mut bits = Vec::with_capacity(w * h);
            // P1 allows samples without separating whitespace.
            while bits.len() < w * h {
                cur.skip_space_and_comments();
                match cur.next_byte() {
                    Some(b'0') => bits.push(0),
                    Some(b'1') => bits.push(1),
                    Some(b) => return Err(cur.error(format!("bad PBM sample {:?}", b as char))),
                    None => return Err(cur.error("truncated PBM data")),
                }
            }
            Ok(Input::Binary(BinaryImage::new(w, h, bits)?))
        }
        "P4" => {
            let (w, h) = (cur.number()?, cur.number()?);
            cur.single_space()?;
            let stride = w.div_ceil(8);
            let raw = cur.rest();
            if raw.len() < stride * h {
                return Err(cur.error("truncated PBM data"));
            }
            let mut bits = Vec::with_capacity(w * h);
            for r in 0..h {
                for c in 0..w {
                    let byte = raw[r * stride + c / 8];
                    bits.push((byte >> (7 - c % 8)) & 1);
                }
            }
            Ok(Input::Binary(BinaryImage::new(w, h, bits)?))
        }
        "P2" | "P5" => {
            let (w, h, maxval) = (cur.number()?, cur.number()?, cur.number()?);
            if maxval == 0 || maxval > 255 {
                return Err(cur.error(format!("unsupported maxval {maxval}, expected 1..=255")));
            }
            let samples: Vec<usize> = if magic == "P2" {
                (0..w * h).map(|_| cur.number()).collect::<Result<_>>()?
            } else {
                cur.single_space()?;
                let raw = cur.rest();
                if raw.len() < w * h {
                    return Err(cur.error("truncated PGM data"));
                }
                raw[..w * h].iter().map(|&b| b as usize).collect()
            };
            let mut pixels = Vec::with_capacity(samples.len());
            for s in samples {
                if s > maxval {
                    return Err(cur.error(format!("sample {s} exceeds maxval {maxval}")));
                }
                pixels.push(((s * 255 + maxval / 2) / maxval) as u8);
            }
            Ok(Input::Gray(GrayImage::new(w, h, pixels)?))
        }
        other => Err(Error::parse(1, format!("unknown image magic {other:?}"))),
    }
}

/// Rectangular grid of `0`/`1` characters, one raster row per non-empty line.
pub fn decode_bit_grid(data: &[u8]) -> Result<BinaryImage> {
    let text = std::str::from_utf8(data).map_err(|_| Error::parse(1, "grid is not UTF-8"))?;
    let mut width = None;
    let mut bits = Vec::new();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if *width.get_or_insert(line.len()) != line.len() {
            return Err(Error::parse(i + 1, "ragged grid row"));
        }
        for ch in line.bytes() {
            match ch {
                b'0' => bits.push(0),
                b'1' => bits.push(1),
                _ => return Err(Error::parse(i + 1, format!("bad grid character {:?}", ch as char))),
            }
        }
        rows += 1;
    }
    BinaryImage::new(width.unwrap_or(0), rows, bits)
}

/// Binary PGM (P5) encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Plain PBM (P1) encoding, one raster row per line.
pub fn encode_pbm(img: &BinaryImage) -> String {
    let mut out = format!("P1\n{} {}\n", img.width(), img.height());
    for row in img.bits().chunks(img.width()) {
        let line: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn line(&self) -> usize {
        1 + self.data[..self.pos.min(self.data.len())]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line(), msg)
    }

    fn next_byte(&mut self) -> Option<u8> {
        let b = self.data.get(self.pos).copied();
        self.pos += 1;
        b
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.data.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("unexpected end of header"));
        }
        Ok(String::from_utf8_lossy(&self.data[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| self.error(format!("expected a number, found {tok:?}")))
    }

    fn single_space(&mut self) -> Result<()> {
        match self.next_byte() {
            Some(b) if b.is_ascii_whitespace() => Ok(()),
            _ => Err(self.error("missing whitespace before raster data")),
        }
    }

    fn rest(&self) -> &[u8] {
        &self.data[self.pos.min(self.data.len())..]
    }
}
