//! Image file I/O: hand-rolled PGM (P2/P5) and 8-bit PNG decoding.
//!
//! Loaded pixels are normalized to `[0, 1]` by the file's maxval; the PGM
//! writer quantizes back to 8 bits with `round(clamp(v, 0, 1) * 255)`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::GrayImage;
use crate::scalar::Real;

const PNG_MAGIC: [u8; 4] = [0x89, b'P', b'N', b'G'];

/// Loads a PGM or PNG file, sniffing the format from its magic bytes.
pub fn load_image<T: Real>(path: impl AsRef<Path>) -> Result<GrayImage<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io_at(path, e))?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else if bytes.starts_with(&PNG_MAGIC) {
        decode_png(&bytes)
    } else {
        Err(Error::Format(format!(
            "{}: unrecognized image format (expected PGM or PNG)",
            path.display()
        )))
    }
}

/// Parses a P2 (ASCII) or P5 (binary) PGM with maxval <= 255.
pub fn parse_pgm<T: Real>(bytes: &[u8]) -> Result<GrayImage<T>> {
    let mut cursor = PgmCursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => {
            return Err(Error::Format(format!(
                "unsupported PGM magic {other:?} (expected P2 or P5)"
            )))
        }
    };
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("degenerate PGM size {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "unsupported PGM maxval {maxval} (must be 1..=255)"
        )));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // A single whitespace byte separates the header from the raster.
        cursor.expect_single_whitespace()?;
        let raster = cursor.rest();
        if raster.len() < count {
            return Err(Error::Format(format!(
                "P5 raster truncated: expected {count} bytes, found {}",
                raster.len()
            )));
        }
        for &b in &raster[..count] {
            if b as usize > maxval {
                return Err(Error::Format(format!(
                    "P5 sample {b} exceeds maxval {maxval}"
                )));
            }
            pixels.push(T::of(b as f64 * scale));
        }
    } else {
        for _ in 0..count {
            let v = cursor.number("sample")?;
            if v > maxval {
                return Err(Error::Format(format!(
                    "P2 sample {v} exceeds maxval {maxval}"
                )));
            }
            pixels.push(T::of(v as f64 * scale));
        }
    }
    GrayImage::from_pixels(width, height, pixels)
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmCursor<'_> {
    fn skip_filler(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse::<usize>()
            .map_err(|_| Error::Format(format!("invalid PGM {what} {tok:?}")))
    }

    fn expect_single_whitespace(&mut self) -> Result<()> {
        if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Format("missing whitespace after P5 header".into()))
        }
    }

    fn rest(&self) -> &[u8] {
        &self.bytes[self.pos..]
    }
}

/// Quantizes a normalized intensity to 8 bits.
#[inline]
pub fn quantize_u8<T: Real>(v: T) -> u8 {
    let c = v.widen().clamp(0.0, 1.0);
    (c * 255.0).round() as u8
}

/// Encodes a binary (P5) PGM with maxval 255.
pub fn encode_pgm<T: Real>(img: &GrayImage<T>) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.pixels().iter().map(|&v| quantize_u8(v)));
    out
}

/// Writes `img` to `path` as a binary PGM.
pub fn write_pgm<T: Real>(path: impl AsRef<Path>, img: &GrayImage<T>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io_at(path, e))
}

/// Decodes an 8-bit grayscale or RGB PNG; color is reduced with the
/// Rec. 601 luma weights 0.299 / 0.587 / 0.114 before normalization.
pub fn decode_png<T: Real>(bytes: &[u8]) -> Result<GrayImage<T>> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("png decode failed: {e}")))?;
    match decoded {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let pixels = g
                .into_raw()
                .into_iter()
                .map(|v| T::of(v as f64 / 255.0))
                .collect();
            GrayImage::from_pixels(w, h, pixels)
        }
        image::DynamicImage::ImageRgb8(rgb) => {
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let raw = rgb.into_raw();
            let pixels = raw
                .chunks_exact(3)
                .map(|px| {
                    let luma =
                        0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
                    T::of(luma / 255.0)
                })
                .collect();
            GrayImage::from_pixels(w, h, pixels)
        }
        image::DynamicImage::ImageLumaA8(_) | image::DynamicImage::ImageRgba8(_) => Err(
            Error::Format("unsupported png: alpha channels are not supported".into()),
        ),
        image::DynamicImage::ImageLuma16(_)
        | image::DynamicImage::ImageLumaA16(_)
        | image::DynamicImage::ImageRgb16(_)
        | image::DynamicImage::ImageRgba16(_) => Err(Error::Format(
            "unsupported png: 16-bit samples are not supported".into(),
        )),
        other => Err(Error::Format(format!(
            "unsupported png pixel format {:?}",
            other.color()
        ))),
    }
}
