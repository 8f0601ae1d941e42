//! Dense displacement fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Per-pixel `(dx, dy)` displacement in pixels, row-major.
///
/// See the crate docs for which grid a field is sampled on.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: usize,
    width: usize,
    vectors: Vec<[f64; 2]>,
}

impl FlowField {
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::constant(height, width, [0.0, 0.0])
    }

    pub fn constant(height: usize, width: usize, v: [f64; 2]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimension(alloc::format!(
                "{height}x{width} flow field"
            )));
        }
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::NonFinite("flow vector"));
        }
        Ok(Self {
            height,
            width,
            vectors: vec![v; height * width],
        })
    }

    pub fn from_vec(height: usize, width: usize, vectors: Vec<[f64; 2]>) -> Result<Self> {
        if height == 0 || width == 0 || vectors.len() != height * width {
            return Err(Error::InvalidDimension(alloc::format!(
                "{} vectors for a {height}x{width} flow field",
                vectors.len()
            )));
        }
        if vectors
            .iter()
            .any(|v| !(v[0].is_finite() && v[1].is_finite()))
        {
            return Err(Error::NonFinite("flow vectors"));
        }
        Ok(Self {
            height,
            width,
            vectors,
        })
    }

    /// Evaluates `f(y, x)` at every pixel.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 2],
    ) -> Result<Self> {
        let mut vectors = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                vectors.push(f(y, x));
            }
        }
        Self::from_vec(height, width, vectors)
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
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> [f64; 2] {
        self.vectors[y * self.width + x]
    }

    #[inline]
    pub(crate) fn set(&mut self, y: usize, x: usize, v: [f64; 2]) {
        self.vectors[y * self.width + x] = v;
    }

    pub fn same_dims(&self, other: &FlowField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: (self.height, self.width, 2),
                actual: (other.height, other.width, 2),
            });
        }
        Ok(())
    }

    /// Fails unless the field covers an `height × width` raster.
    pub fn check_dims(&self, height: usize, width: usize) -> Result<()> {
        if self.dims() != (height, width) {
            return Err(Error::DimensionMismatch {
                expected: (height, width, 2),
                actual: (self.height, self.width, 2),
            });
        }
        Ok(())
    }

    /// Multiplies every vector by `s`.
    pub fn scale(&self, s: f64) -> FlowField {
        self.map(|v| [v[0] * s, v[1] * s])
    }

    pub fn neg(&self) -> FlowField {
        self.map(|v| [-v[0], -v[1]])
    }

    pub fn add(&self, other: &FlowField) -> Result<FlowField> {
        self.zip_map(other, |a, b| [a[0] + b[0], a[1] + b[1]])
    }

    pub fn sub(&self, other: &FlowField) -> Result<FlowField> {
        self.zip_map(other, |a, b| [a[0] - b[0], a[1] - b[1]])
    }

    /// Applies `f` per vector; non-finite components become zero.
    pub fn map(&self, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> FlowField {
        FlowField {
            height: self.height,
            width: self.width,
            vectors: self.vectors.iter().map(|&v| sanitize(f(v))).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &FlowField,
        mut f: impl FnMut([f64; 2], [f64; 2]) -> [f64; 2],
    ) -> Result<FlowField> {
        self.same_dims(other)?;
        Ok(FlowField {
            height: self.height,
            width: self.width,
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(&a, &b)| sanitize(f(a, b)))
                .collect(),
        })
    }

    /// Per-pixel Euclidean norms.
    pub fn norms(&self) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| math::hypot(v[0], v[1]))
            .collect()
    }

    pub fn mean_norm(&self) -> f64 {
        self.norms().iter().sum::<f64>() / self.vectors.len() as f64
    }

    /// Bilinear sample with the position clamped to the field.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> [f64; 2] {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = math::floor(x);
        let y0 = math::floor(y);
        let (fx, fy) = (x - x0, y - y0);
        let (x0, y0) = (x0 as usize, y0 as usize);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let top = (1.0 - fx) * self.get(y0, x0)[k] + fx * self.get(y0, x1)[k];
            let bottom = (1.0 - fx) * self.get(y1, x0)[k] + fx * self.get(y1, x1)[k];
            *o = (1.0 - fy) * top + fy * bottom;
        }
        out
    }

    /// Resamples to a finer `height × width` grid and rescales the vectors to match.
    pub fn upsample_to(&self, height: usize, width: usize) -> Result<FlowField> {
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        FlowField::from_fn(height, width, |y, x| {
            let v = self.sample_bilinear((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5);
            [v[0] / sx, v[1] / sy]
        })
    }

    /// Backward-warps this field by `by`: `out(x) = self(x + by(x))`.
    pub fn warp(&self, by: &FlowField) -> Result<FlowField> {
        self.same_dims(by)?;
        FlowField::from_fn(self.height, self.width, |y, x| {
            let d = by.get(y, x);
            self.sample_bilinear(x as f64 + d[0], y as f64 + d[1])
        })
    }
}

#[inline]
fn sanitize(v: [f64; 2]) -> [f64; 2] {
    [
        if v[0].is_finite() { v[0] } else { 0.0 },
        if v[1].is_finite() { v[1] } else { 0.0 },
    ]
}
