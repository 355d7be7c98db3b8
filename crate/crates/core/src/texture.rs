//! Local binary pattern coding and the homogeneity measure used as the
//! image-quality input.
//!
//! Every interior pixel gets an 8-bit code: bit `i` is set when neighbor `i`
//! is at least as bright as the center. Neighbors are the 8 surrounding
//! pixels (radius 1), starting east and proceeding counter-clockwise:
//! E, NE, N, NW, W, SW, S, SE. Border pixels are not coded.
//!
//! Homogeneity is the histogram mass inside a bin window, by default the
//! window of +-8 bins around the modal bin. Smooth, glossy surfaces pile up
//! on a few codes and score high; rough skin spreads out and scores low.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::GrayImage;

#[derive(Debug, Error)]
pub enum TextureError {
    #[error("image is {width}x{height}, LBP coding needs at least 3x3")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("invalid homogeneity window [{k}, {l}]")]
    InvalidWindow { k: u16, l: u16 },
    #[error("cannot normalize an empty histogram")]
    EmptyHistogram,
    #[error("normalization target {0} must be positive")]
    InvalidNormalization(f64),
    #[error("histogram export failed: {0}")]
    Export(#[from] csv::Error),
}

/// `(dx, dy)` for neighbor index 0..8; image rows grow downwards.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpImage {
    width: u32,
    height: u32,
    codes: Vec<u8>,
}

impl LbpImage {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    /// Code of interior pixel `(x + 1, y + 1)` of the source.
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.codes[y as usize * self.width as usize + x as usize]
    }
}

pub fn lbp_transform(img: &GrayImage) -> Result<LbpImage, TextureError> {
    let (w, h) = img.dimensions();
    if w < 3 || h < 3 {
        return Err(TextureError::ImageTooSmall { width: w, height: h });
    }
    let stride = w as usize;
    let px = img.pixels();
    let mut codes = Vec::with_capacity((w as usize - 2) * (h as usize - 2));
    for y in 1..h as usize - 1 {
        for x in 1..w as usize - 1 {
            let center = px[y * stride + x];
            let mut code = 0u8;
            for (bit, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
                let nx = (x as isize + *dx as isize) as usize;
                let ny = (y as isize + *dy as isize) as usize;
                if px[ny * stride + nx] >= center {
                    code |= 1 << bit;
                }
            }
            codes.push(code);
        }
    }
    Ok(LbpImage {
        width: w - 2,
        height: h - 2,
        codes,
    })
}

/// 256-bin frequency table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; 256],
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram { bins: [0; 256] }
    }
}

impl Histogram {
    pub fn from_values(values: &[u8]) -> Self {
        let mut hist = Histogram::default();
        for &v in values {
            hist.bins[v as usize] += 1;
        }
        hist
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Most populated bin; the lowest index wins ties.
    pub fn mode(&self) -> u8 {
        let mut best = 0;
        for (i, &count) in self.bins.iter().enumerate() {
            if count > self.bins[best] {
                best = i;
            }
        }
        best as u8
    }

    /// Writes `bin,count` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TextureError> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["bin", "count"])?;
        for (bin, count) in self.bins.iter().enumerate() {
            wtr.write_record([bin.to_string(), count.to_string()])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn histogram(lbp: &LbpImage) -> Histogram {
    Histogram::from_values(&lbp.codes)
}

/// Inclusive bin range `[k, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneityWindow {
    k: u8,
    l: u8,
}

impl HomogeneityWindow {
    pub fn new(k: u16, l: u16) -> Result<Self, TextureError> {
        if k > l || l > 255 {
            return Err(TextureError::InvalidWindow { k, l });
        }
        Ok(HomogeneityWindow {
            k: k as u8,
            l: l as u8,
        })
    }

    /// `[m - half_width, m + half_width]` around the modal bin `m`, clipped to `[0, 255]`.
    pub fn around_mode(hist: &Histogram, half_width: u8) -> Self {
        let m = hist.mode();
        HomogeneityWindow {
            k: m.saturating_sub(half_width),
            l: m.saturating_add(half_width),
        }
    }

    pub fn bounds(&self) -> (u8, u8) {
        (self.k, self.l)
    }
}

/// Histogram mass inside `window`, optionally rescaled as if the histogram
/// held `normalize_to` samples.
pub fn homogeneity(
    hist: &Histogram,
    window: HomogeneityWindow,
    normalize_to: Option<f64>,
) -> Result<f64, TextureError> {
    let sum: u64 = hist.bins[window.k as usize..=window.l as usize].iter().sum();
    match normalize_to {
        None => Ok(sum as f64),
        Some(target) => {
            if !(target > 0.0 && target.is_finite()) {
                return Err(TextureError::InvalidNormalization(target));
            }
            let total = hist.total();
            if total == 0 {
                return Err(TextureError::EmptyHistogram);
            }
            Ok(sum as f64 * target / total as f64)
        }
    }
}

/// Which values are histogrammed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramOperand {
    #[default]
    Lbp,
    /// Raw intensities of the whole image.
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowChoice {
    Modal { half_width: u8 },
    Fixed { k: u16, l: u16 },
}

impl Default for WindowChoice {
    fn default() -> Self {
        WindowChoice::Modal { half_width: 8 }
    }
}

/// Default rescaling target: a histogram entirely inside the window maps to
/// the top of the image-quality domain.
pub const DEFAULT_NORMALIZE_TO: f64 = 1300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextureConfig {
    pub window: WindowChoice,
    pub normalize_to: Option<f64>,
    pub operand: HistogramOperand,
}

impl Default for TextureConfig {
    fn default() -> Self {
        TextureConfig {
            window: WindowChoice::default(),
            normalize_to: Some(DEFAULT_NORMALIZE_TO),
            operand: HistogramOperand::Lbp,
        }
    }
}

impl TextureConfig {
    pub fn histogram_of(&self, img: &GrayImage) -> Result<Histogram, TextureError> {
        match self.operand {
            HistogramOperand::Lbp => Ok(histogram(&lbp_transform(img)?)),
            HistogramOperand::Intensity => Ok(Histogram::from_values(img.pixels())),
        }
    }

    pub fn window_for(&self, hist: &Histogram) -> Result<HomogeneityWindow, TextureError> {
        match self.window {
            WindowChoice::Modal { half_width } => Ok(HomogeneityWindow::around_mode(hist, half_width)),
            WindowChoice::Fixed { k, l } => HomogeneityWindow::new(k, l),
        }
    }

    /// Homogeneity `psi` of a whole image.
    pub fn measure(&self, img: &GrayImage) -> Result<f64, TextureError> {
        let hist = self.histogram_of(img)?;
        let window = self.window_for(&hist)?;
        homogeneity(&hist, window, self.normalize_to)
    }
}
