//! Linear RGB images and the PFM container.

use std::path::Path;

use crate::error::{Error, Result};

/// Row-major linear RGB image, row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f32; 3]>,
}

fn header_err(line: usize, message: String) -> Error {
    Error::Parse { line, column: 1, message }
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Image { width, height, pixels: vec![[0.0; 3]; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: [f32; 3]) {
        self.pixels[y * self.width + x] = v;
    }

    /// Greyscale image from a scalar per pixel.
    pub fn from_scalar(width: usize, height: usize, values: &[f64]) -> Self {
        let pixels = values.iter().map(|&v| [v as f32; 3]).collect();
        Image { width, height, pixels }
    }

    /// PFM bytes: `PF\n{w} {h}\n-1.0\n`, then little-endian floats with
    /// rows stored bottom-to-top.
    pub fn encode_pfm(&self) -> Vec<u8> {
        let mut out = format!("PF\n{} {}\n-1.0\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 12);
        for y in (0..self.height).rev() {
            for p in &self.pixels[y * self.width..(y + 1) * self.width] {
                for c in p {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode_pfm(bytes: &[u8]) -> Result<Self> {
        // The header is three newline-terminated text lines.
        let mut pos = 0;
        let mut lines = Vec::new();
        for line_no in 1..=3 {
            let end = bytes[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| header_err(line_no, "truncated PFM header".into()))?;
            let text = std::str::from_utf8(&bytes[pos..pos + end])
                .map_err(|_| header_err(line_no, "PFM header is not text".into()))?;
            lines.push(text.trim().to_string());
            pos += end + 1;
        }
        let channels = match lines[0].as_str() {
            "PF" => 3,
            "Pf" => 1,
            other => return Err(header_err(1, format!("bad PFM header line 1: '{other}' (expected 'PF')"))),
        };
        let dims: Vec<&str> = lines[1].split_whitespace().collect();
        let (width, height) = match dims.as_slice() {
            [w, h] => match (w.parse::<usize>(), h.parse::<usize>()) {
                (Ok(w), Ok(h)) => (w, h),
                _ => return Err(header_err(2, format!("bad PFM size line: '{}'", lines[1]))),
            },
            _ => return Err(header_err(2, format!("bad PFM size line: '{}'", lines[1]))),
        };
        let scale: f64 = lines[2]
            .parse()
            .ok()
            .filter(|s: &f64| *s != 0.0 && s.is_finite())
            .ok_or_else(|| header_err(3, format!("bad PFM scale line: '{}'", lines[2])))?;
        let little = scale < 0.0;
        let need = width * height * channels * 4;
        let payload = &bytes[pos..];
        if payload.len() < need {
            return Err(Error::Parse {
                line: 4,
                column: 1,
                message: format!("truncated PFM payload: {} of {need} bytes", payload.len()),
            });
        }
        let mut img = Image::new(width, height);
        let mut k = 0;
        let mut next = || {
            let b = [payload[k], payload[k + 1], payload[k + 2], payload[k + 3]];
            k += 4;
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        };
        for y in (0..height).rev() {
            for x in 0..width {
                let v = if channels == 3 {
                    [next(), next(), next()]
                } else {
                    let g = next();
                    [g; 3]
                };
                img.pixels[y * width + x] = v;
            }
        }
        Ok(img)
    }

    pub fn write_pfm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode_pfm())
            .map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn read_pfm(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })?;
        Self::decode_pfm(&bytes).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
    }

    /// 8-bit sRGB-ish preview: gamma 2.2 and clamping.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            for &c in p {
                let v = if c.is_finite() { c.max(0.0) } else { 0.0 };
                out.push((v.powf(1.0 / 2.2).min(1.0) * 255.0 + 0.5) as u8);
            }
        }
        out
    }
}
