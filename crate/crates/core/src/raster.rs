//! Grayscale and binary rasters, Gaussian smoothing and thresholding.

use crate::error::{Error, Result};

/// An 8-bit grayscale raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    fn clamped(&self, row: isize, col: isize) -> u8 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }
}

/// A binary raster, row-major, `1` is ink.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::invalid(format!("binary pixel value {bad} is not 0 or 1")));
        }
        Ok(BinaryImage {
            width,
            height,
            bits,
        })
    }

    pub fn blank(width: usize, height: usize) -> Result<Self> {
        BinaryImage::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col] == 1
    }

    /// Like [`get`](Self::get) but treats everything outside the raster as background.
    pub fn get_or_zero(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.get(row as usize, col as usize)
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.bits[row * self.width + col] = on as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_blank(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Inclusive bounding box of the foreground as `(top, left, bottom, right)`.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) {
                    bbox = Some(match bbox {
                        None => (r, c, r, c),
                        Some((t, l, b, rt)) => (t.min(r), l.min(c), b.max(r), rt.max(c)),
                    });
                }
            }
        }
        bbox
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("zero-dimension image {width}x{height}")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::invalid(format!(
            "{len} pixels do not fill a {width}x{height} image"
        )));
    }
    Ok(())
}

const BINOMIAL_3X3: [[u32; 3]; 3] = [[1, 2, 1], [2, 4, 2], [1, 2, 1]];

/// Smooth with the 3×3 binomial kernel `[1 2 1; 2 4 2; 1 2 1] / 16`.
///
/// Borders replicate the nearest edge pixel; results are rounded half up.
pub fn gaussian_smooth(img: &GrayImage) -> GrayImage {
    let mut out = Vec::with_capacity(img.pixels.len());
    for r in 0..img.height as isize {
        for c in 0..img.width as isize {
            let mut acc = 0u32;
            for (dr, krow) in BINOMIAL_3X3.iter().enumerate() {
                for (dc, &k) in krow.iter().enumerate() {
                    acc += k * img.clamped(r + dr as isize - 1, c + dc as isize - 1) as u32;
                }
            }
            // acc <= 16 * 255, so the rounded quotient already lies in [0, 255].
            out.push(((acc + 8) / 16) as u8);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

/// How [`binarize`] picks its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    /// Pixels darker than the given value become ink.
    Fixed(u8),
    /// Threshold chosen by [`otsu_threshold`].
    Otsu,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Fixed(128)
    }
}

/// Map intensities to ink (`1`, strictly below the threshold) and background.
pub fn binarize(img: &GrayImage, mode: Threshold) -> BinaryImage {
    let t = match mode {
        Threshold::Fixed(t) => t,
        Threshold::Otsu => otsu_threshold(img),
    };
    BinaryImage {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| (p < t) as u8).collect(),
    }
}

/// 256-bin intensity histogram.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in &img.pixels {
        hist[p as usize] += 1;
    }
    hist
}

/// Otsu's threshold over the 256-bin histogram.
///
/// The returned `t` splits pixels into `< t` (ink) and `>= t`; it is the
/// candidate in `0..=255` with the largest between-class variance, the lowest
/// one on ties. A constant image has no split with positive variance and yields 0.
pub fn otsu_threshold(img: &GrayImage) -> u8 {
    let hist = histogram(img);
    let total = img.pixels.len() as f64;
    let sum_total: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &n)| v as f64 * n as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = 0.0f64;
    let mut w_dark = 0.0f64;
    let mut sum_dark = 0.0f64;
    for t in 1..=255usize {
        // Dark class is [0, t), so bin t-1 joins it now.
        w_dark += hist[t - 1] as f64;
        sum_dark += (t - 1) as f64 * hist[t - 1] as f64;
        let w_light = total - w_dark;
        if w_dark == 0.0 || w_light == 0.0 {
            continue;
        }
        let mean_dark = sum_dark / w_dark;
        let mean_light = (sum_total - sum_dark) / w_light;
        let var = w_dark * w_light * (mean_dark - mean_light).powi(2) / (total * total);
        // Relative margin so that rounding noise cannot break a genuine tie.
        if var > best_var * (1.0 + 1e-12) {
            best_var = var;
            best_t = t as u8;
        }
    }
    best_t
}
