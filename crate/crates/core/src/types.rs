//! Small domain types: the four-frame input window, intermediate timestamps and blend masks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;

/// A rational intermediate time `num / den`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeStamp {
    num: u32,
    den: u32,
}

impl TimeStamp {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || num >= den {
            return Err(Error::InvalidTimeStamp { num, den });
        }
        Ok(Self { num, den })
    }

    /// `i / 8`, the timestamps of the 8× schedule (`i ∈ 1..=7`).
    pub fn eighth(i: u32) -> Result<Self> {
        Self::new(i, 8)
    }

    /// The `n` evenly spaced stamps `i / (n + 1)` for `i = 1..=n`.
    pub fn uniform(n: usize) -> Vec<TimeStamp> {
        let den = n as u32 + 1;
        (1..den).map(|i| TimeStamp { num: i, den }).collect()
    }

    #[inline]
    pub fn num(&self) -> u32 {
        self.num
    }

    #[inline]
    pub fn den(&self) -> u32 {
        self.den
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 − t` as a timestamp.
    pub fn mirrored(&self) -> TimeStamp {
        TimeStamp {
            num: self.den - self.num,
            den: self.den,
        }
    }
}

impl core::fmt::Display for TimeStamp {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Frames `I_{-1}, I_0, I_1, I_2` at nominal times `-1, 0, 1, 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputQuad {
    frames: [Image; 4],
}

impl InputQuad {
    pub fn new(prev: Image, first: Image, second: Image, next: Image) -> Result<Self> {
        first.same_dims(&prev)?;
        first.same_dims(&second)?;
        first.same_dims(&next)?;
        Ok(Self {
            frames: [prev, first, second, next],
        })
    }

    /// `I_{-1}`.
    pub fn prev(&self) -> &Image {
        &self.frames[0]
    }

    /// `I_0`.
    pub fn first(&self) -> &Image {
        &self.frames[1]
    }

    /// `I_1`.
    pub fn second(&self) -> &Image {
        &self.frames[2]
    }

    /// `I_2`.
    pub fn next(&self) -> &Image {
        &self.frames[3]
    }

    pub fn frames(&self) -> &[Image; 4] {
        &self.frames
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.frames[0].dims()
    }

    /// The same window played backwards: `(I_2, I_1, I_0, I_{-1})`.
    pub fn reversed(&self) -> InputQuad {
        let [a, b, c, d] = self.frames.clone();
        InputQuad {
            frames: [d, c, b, a],
        }
    }
}

/// Per-pixel weight of the frame warped from `I_0`; `1 − w` weights the one from `I_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendMask {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl BlendMask {
    pub fn constant(height: usize, width: usize, w: f64) -> Result<Self> {
        Self::from_vec(height, width, alloc::vec![w; height * width])
    }

    pub fn from_vec(height: usize, width: usize, weights: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || weights.len() != height * width {
            return Err(Error::InvalidDimension(alloc::format!(
                "{} weights for a {height}x{width} mask",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidDimension(
                "blend weights must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            weights,
        })
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.weights[y * self.width + x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert!(TimeStamp::new(0, 8).is_err());
        assert!(TimeStamp::new(8, 8).is_err());
        let t = TimeStamp::eighth(3).unwrap();
        assert_eq!(t.value(), 0.375);
        assert_eq!(t.mirrored(), TimeStamp::eighth(5).unwrap());
        let u = TimeStamp::uniform(7);
        assert_eq!(u.len(), 7);
        assert_eq!(u[6].value(), 7.0 / 8.0);
        assert_eq!(TimeStamp::uniform(1)[0].value(), 0.5);
    }

    #[test]
    fn quad_rejects_mismatched_frames() {
        let a = Image::new(4, 4, 1, 0.0).unwrap();
        let b = Image::new(4, 5, 1, 0.0).unwrap();
        assert!(matches!(
            InputQuad::new(a.clone(), a.clone(), b, a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mask_range_is_enforced() {
        assert!(BlendMask::from_vec(1, 2, alloc::vec![0.5, 1.2]).is_err());
        assert!(BlendMask::constant(2, 2, 0.25).is_ok());
    }
}
