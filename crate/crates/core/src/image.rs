//! Grayscale ingestion, intensity quantization and overlapping-window cropping.
//!
//! Images are held as row-major grids of quantized level indices. Sources are
//! PNG (any bit depth, color reduced to Rec. 601 luminance) and binary PGM (P5).

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};

/// Row-major grid of intensity levels in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    levels: u32,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, levels: u32, pixels: Vec<u16>) -> Result<Self> {
        if !(2..=65536).contains(&levels) {
            return Err(Error::InvalidLevels(levels));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| u32::from(p) >= levels) {
            return Err(Error::InvalidImage(format!(
                "pixel value {bad} out of range for {levels} levels"
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    /// Builds an image from a row-major closure.
    pub fn from_fn(
        width: usize,
        height: usize,
        levels: u32,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, levels, pixels)
    }

    /// Quantizes 8-bit samples into `levels` bins.
    pub fn from_u8(width: usize, height: usize, levels: u32, samples: &[u8]) -> Result<Self> {
        check_levels(levels)?;
        let pixels = samples
            .iter()
            .map(|&s| quantize_sample(u32::from(s), 255, levels))
            .collect();
        Self::new(width, height, levels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u16]> {
        self.pixels.chunks_exact(self.width)
    }

    /// Re-bins the image into `levels` bins: `level' = floor(level * levels / self.levels)`.
    ///
    /// For images quantized from 8-bit data this agrees with quantizing the
    /// original samples directly, so 256 → 32 equals `floor(p * 32 / 256)`.
    pub fn requantize(&self, levels: u32) -> Result<Self> {
        check_levels(levels)?;
        if levels == self.levels {
            return Ok(self.clone());
        }
        let src = u64::from(self.levels);
        let dst = u64::from(levels);
        let pixels = self
            .pixels
            .iter()
            .map(|&p| (u64::from(p) * dst / src).min(dst - 1) as u16)
            .collect();
        Ok(Self {
            pixels,
            levels,
            ..*self
        })
    }

    /// Copies the `width`×`height` region whose top-left corner is `(x, y)`.
    pub fn region(&self, x: usize, y: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(Error::InvalidCrop(format!(
                "region {width}x{height} at ({x}, {y}) outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for row in self.rows().skip(y).take(height) {
            pixels.extend_from_slice(&row[x..x + width]);
        }
        Ok(Self {
            width,
            height,
            levels: self.levels,
            pixels,
        })
    }

    /// Writes a binary PGM (P5) with `maxval = levels - 1`.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let maxval = self.levels - 1;
        let mut buf = format!("P5\n{} {}\n{}\n", self.width, self.height, maxval).into_bytes();
        if maxval < 256 {
            buf.extend(self.pixels.iter().map(|&p| p as u8));
        } else {
            for &p in &self.pixels {
                buf.extend_from_slice(&p.to_be_bytes());
            }
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&buf).map_err(|e| Error::io(path, e))
    }
}

fn check_levels(levels: u32) -> Result<()> {
    if (2..=65536).contains(&levels) {
        Ok(())
    } else {
        Err(Error::InvalidLevels(levels))
    }
}

/// Uniform binning of a sample in `0..=maxval` into `levels` bins:
/// `floor(sample * levels / (maxval + 1))`, clamped to `levels - 1`.
pub fn quantize_sample(sample: u32, maxval: u32, levels: u32) -> u16 {
    let bin = u64::from(sample) * u64::from(levels) / (u64::from(maxval) + 1);
    bin.min(u64::from(levels) - 1) as u16
}

/// Integer-rounded Rec. 601 luma.
pub fn luma601(r: u32, g: u32, b: u32) -> u32 {
    ((299 * u64::from(r) + 587 * u64::from(g) + 114 * u64::from(b) + 500) / 1000) as u32
}

/// Loads a PNG or binary PGM and quantizes it to `levels` intensity bins.
pub fn load_gray(path: impl AsRef<Path>, levels: u32) -> Result<GrayImage> {
    let path = path.as_ref();
    check_levels(levels)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        return decode_pgm(&bytes, levels).map_err(|reason| Error::Decode {
            path: path.to_path_buf(),
            reason,
        });
    }
    if bytes.starts_with(b"\x89PNG") {
        let img = ImageReader::with_format(std::io::Cursor::new(bytes), image::ImageFormat::Png)
            .decode()
            .map_err(|e| Error::Decode {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        return from_dynamic(&img, levels);
    }
    Err(Error::UnsupportedFormat {
        path: path.to_path_buf(),
    })
}

fn from_dynamic(img: &DynamicImage, levels: u32) -> Result<GrayImage> {
    let width = img.width() as usize;
    let height = img.height() as usize;
    let high_depth = img.color().bytes_per_pixel() / img.color().channel_count() > 1;
    let pixels: Vec<u16> = match (img.color().has_color(), high_depth) {
        (false, false) => img
            .to_luma8()
            .into_raw()
            .into_iter()
            .map(|p| quantize_sample(u32::from(p), 255, levels))
            .collect(),
        (false, true) => img
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|p| quantize_sample(u32::from(p), 65535, levels))
            .collect(),
        (true, false) => img
            .to_rgb8()
            .pixels()
            .map(|px| {
                let [r, g, b] = px.0.map(u32::from);
                quantize_sample(luma601(r, g, b), 255, levels)
            })
            .collect(),
        (true, true) => img
            .to_rgb16()
            .pixels()
            .map(|px| {
                let [r, g, b] = px.0.map(u32::from);
                quantize_sample(luma601(r, g, b), 65535, levels)
            })
            .collect(),
    };
    GrayImage::new(width, height, levels, pixels)
}

fn decode_pgm(bytes: &[u8], levels: u32) -> std::result::Result<GrayImage, String> {
    let mut pos = 2;
    let mut header = [0u32; 3];
    for field in header.iter_mut() {
        // whitespace and '#' comments may separate header fields
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| "malformed PGM header".to_string())?;
    }
    let [width, height, maxval] = header.map(|v| v as usize);
    if !(1..=65535).contains(&maxval) {
        return Err(format!("invalid PGM maxval {maxval}"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("malformed PGM header".into());
    }
    pos += 1;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[pos..];
    let expected = width * height * sample_bytes;
    if data.len() < expected {
        return Err(format!(
            "truncated PGM data: expected {expected} bytes, found {}",
            data.len()
        ));
    }
    let samples: Vec<u32> = if sample_bytes == 1 {
        data[..expected].iter().map(|&b| u32::from(b)).collect()
    } else {
        data[..expected]
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    if let Some(&s) = samples.iter().find(|&&s| s as usize > maxval) {
        return Err(format!("sample {s} exceeds maxval {maxval}"));
    }
    let pixels = samples
        .into_iter()
        .map(|s| quantize_sample(s, maxval as u32, levels))
        .collect();
    GrayImage::new(width, height, levels, pixels).map_err(|e| e.to_string())
}

/// Square sliding window with a fixed stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CropSpec {
    pub window: usize,
    pub stride: usize,
}

impl CropSpec {
    pub fn new(window: usize, stride: usize) -> Result<Self> {
        if stride == 0 || stride > window {
            return Err(Error::InvalidCrop(format!(
                "need 1 <= stride <= window, got window {window}, stride {stride}"
            )));
        }
        Ok(Self { window, stride })
    }

    /// Number of window positions along an axis of length `len`.
    pub fn positions(&self, len: usize) -> usize {
        if len < self.window {
            0
        } else {
            (len - self.window) / self.stride + 1
        }
    }
}

/// A cropped window together with its grid coordinates in the source.
#[derive(Debug, Clone)]
pub struct Window {
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
    pub image: GrayImage,
}

/// Crops every window that fits entirely inside `img`, in row-major order.
pub fn crop_grid(img: &GrayImage, spec: CropSpec) -> Result<Vec<Window>> {
    let spec = CropSpec::new(spec.window, spec.stride)?;
    if spec.window > img.width().min(img.height()) {
        return Err(Error::InvalidCrop(format!(
            "window {} larger than {}x{} image",
            spec.window,
            img.width(),
            img.height()
        )));
    }
    let cols = spec.positions(img.width());
    let rows = spec.positions(img.height());
    let mut out = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let (x, y) = (col * spec.stride, row * spec.stride);
            out.push(Window {
                row,
                col,
                x,
                y,
                image: img.region(x, y, spec.window, spec.window)?,
            });
        }
    }
    Ok(out)
}

pub fn crop_windows(img: &GrayImage, spec: CropSpec) -> Result<Vec<GrayImage>> {
    Ok(crop_grid(img, spec)?.into_iter().map(|w| w.image).collect())
}
