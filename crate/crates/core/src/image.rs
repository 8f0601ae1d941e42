//! Floating-point raster shared by every stage of the pipeline.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// An `H×W×C` raster, row-major and channel-interleaved, nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

/// Low-pass filter applied before 2× decimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DownsampleFilter {
    /// Separable 5-tap binomial `[1 4 6 4 1] / 16`.
    #[default]
    Gaussian,
    /// Plain 2×2 mean.
    Box,
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidDimension(alloc::format!(
            "{height}x{width} raster"
        )));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::InvalidDimension(alloc::format!(
            "{channels} channels (expected 1 or 3)"
        )));
    }
    Ok(())
}

impl Image {
    /// Constant image.
    pub fn new(height: usize, width: usize, channels: usize, fill: f64) -> Result<Self> {
        check_dims(height, width, channels)?;
        if !fill.is_finite() {
            return Err(Error::NonFinite("image fill"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data: vec![fill; height * width * channels],
        })
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, channels)?;
        if data.len() != height * width * channels {
            return Err(Error::InvalidDimension(alloc::format!(
                "{} samples for a {height}x{width}x{channels} raster",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data"));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds an image by evaluating `f(y, x, c)` at every sample.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(height, width, channels)?;
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::from_vec(height, width, channels, data)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(height, width, channels)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Sample at integer coordinates that may lie outside the raster; indices are clamped.
    #[inline]
    pub fn get_clamped(&self, y: isize, x: isize, c: usize) -> f64 {
        let yy = y.clamp(0, self.height as isize - 1) as usize;
        let xx = x.clamp(0, self.width as isize - 1) as usize;
        self.get(yy, xx, c)
    }

    /// Bilinear sample at continuous `(x, y)`, clamping the position to the raster.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        let xm = (self.width - 1) as f64;
        let ym = (self.height - 1) as f64;
        let x = x.clamp(0.0, xm);
        let y = y.clamp(0.0, ym);
        let x0 = math::floor(x);
        let y0 = math::floor(y);
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as usize;
        let y0 = y0 as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let top = (1.0 - fx) * self.get(y0, x0, c) + fx * self.get(y0, x1, c);
        let bottom = (1.0 - fx) * self.get(y1, x0, c) + fx * self.get(y1, x1, c);
        (1.0 - fy) * top + fy * bottom
    }

    pub fn same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    /// Channel mean as a single-channel image.
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let inv = 1.0 / self.channels as f64;
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px.iter().sum::<f64>() * inv)
            .collect();
        Image {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        }
    }

    /// Applies `f` to every sample. Non-finite results are replaced by zero.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        let data = self
            .data
            .iter()
            .map(|&v| {
                let r = f(v);
                if r.is_finite() {
                    r
                } else {
                    0.0
                }
            })
            .collect();
        self.with_data(data)
    }

    /// Per-sample combination of two equally sized images.
    pub fn zip_map(&self, other: &Image, mut f: impl FnMut(f64, f64) -> f64) -> Result<Image> {
        self.same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| {
                let r = f(a, b);
                if r.is_finite() {
                    r
                } else {
                    0.0
                }
            })
            .collect();
        Ok(self.with_data(data))
    }

    fn with_data(&self, data: Vec<f64>) -> Image {
        debug_assert_eq!(data.len(), self.data.len());
        Image {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data,
        }
    }

    /// Clamps every sample into `[0, 1]`.
    pub fn clamp01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    /// Halves the resolution with the default low-pass filter.
    pub fn downsample2(&self) -> Result<Image> {
        self.downsample2_with(DownsampleFilter::default())
    }

    /// Halves the resolution to `ceil(h/2) × ceil(w/2)`. Borders are edge-replicated.
    pub fn downsample2_with(&self, filter: DownsampleFilter) -> Result<Image> {
        if self.height < 2 || self.width < 2 {
            return Err(Error::TooSmall {
                height: self.height,
                width: self.width,
                min: 2,
            });
        }
        let oh = self.height.div_ceil(2);
        let ow = self.width.div_ceil(2);
        let ch = self.channels;
        let mut out = Image {
            height: oh,
            width: ow,
            channels: ch,
            data: vec![0.0; oh * ow * ch],
        };
        match filter {
            DownsampleFilter::Box => {
                for y in 0..oh {
                    for x in 0..ow {
                        let (sy, sx) = (2 * y as isize, 2 * x as isize);
                        for c in 0..ch {
                            let s = self.get_clamped(sy, sx, c)
                                + self.get_clamped(sy, sx + 1, c)
                                + self.get_clamped(sy + 1, sx, c)
                                + self.get_clamped(sy + 1, sx + 1, c);
                            out.set(y, x, c, s * 0.25);
                        }
                    }
                }
            }
            DownsampleFilter::Gaussian => {
                const TAPS: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
                // Horizontal pass at decimated columns, full rows.
                let mut tmp = vec![0.0; self.height * ow * ch];
                for y in 0..self.height {
                    for x in 0..ow {
                        for c in 0..ch {
                            let mut s = 0.0;
                            for (k, w) in TAPS.iter().enumerate() {
                                s += w * self.get_clamped(y as isize, (2 * x + k) as isize - 2, c);
                            }
                            tmp[(y * ow + x) * ch + c] = s / 16.0;
                        }
                    }
                }
                for y in 0..oh {
                    for x in 0..ow {
                        for c in 0..ch {
                            let mut s = 0.0;
                            for (k, w) in TAPS.iter().enumerate() {
                                let yy = ((2 * y + k) as isize - 2)
                                    .clamp(0, self.height as isize - 1)
                                    as usize;
                                s += w * tmp[(yy * ow + x) * ch + c];
                            }
                            out.set(y, x, c, s / 16.0);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
