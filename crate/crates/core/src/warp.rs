//! Backward warping, blend masks and intermediate-frame synthesis.

use alloc::vec::Vec;

use crate::error::Result;
use crate::flow::FlowField;
use crate::image::Image;
use crate::math;
use crate::types::{BlendMask, TimeStamp};

/// `out(x, y) = img(x + dx, y + dy)`, bilinear, with positions clamped to the raster.
pub fn warp_bilinear(img: &Image, flow: &FlowField) -> Result<Image> {
    flow.check_dims(img.height(), img.width())?;
    Image::from_fn(img.height(), img.width(), img.channels(), |y, x, c| {
        let d = flow.get(y, x);
        img.sample_bilinear(x as f64 + d[0], y as f64 + d[1], c)
    })
}

/// Binary map, on the grid of `forward`, of pixels whose round trip through
/// `forward` then `backward` misses by more than `0.5 + 0.01·(|forward| + |backward|)`.
pub fn inconsistency_map(forward: &FlowField, backward: &FlowField) -> Result<Vec<f64>> {
    forward.same_dims(backward)?;
    let back = backward.warp(forward)?;
    Ok(forward
        .vectors()
        .iter()
        .zip(back.vectors())
        .map(|(f, b)| {
            let miss = math::hypot(f[0] + b[0], f[1] + b[1]);
            let tol = 0.5 + 0.01 * (math::hypot(f[0], f[1]) + math::hypot(b[0], b[1]));
            if miss > tol {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

fn sample_map(map: &[f64], h: usize, w: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = math::floor(x);
    let y0 = math::floor(y);
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = (1.0 - fx) * map[y0 * w + x0] + fx * map[y0 * w + x1];
    let bottom = (1.0 - fx) * map[y1 * w + x0] + fx * map[y1 * w + x1];
    (1.0 - fy) * top + fy * bottom
}

/// Temporal-distance prior `1 − t`, shifted toward whichever source is visible
/// where the other one is occluded.
///
/// `f01` and `f10` are the inter-input flows; their forward–backward
/// inconsistency marks points of `I_1` missing from `I_0` (on `I_1`'s grid) and
/// points of `I_0` missing from `I_1` (on `I_0`'s grid). Each target pixel looks
/// both maps up at its source positions `x + f0t` and `x + f1t`.
pub fn default_blend_mask(
    f0t: &FlowField,
    f1t: &FlowField,
    t: TimeStamp,
    f01: &FlowField,
    f10: &FlowField,
) -> Result<BlendMask> {
    f0t.same_dims(f1t)?;
    f0t.same_dims(f01)?;
    f0t.same_dims(f10)?;
    let (h, w) = f0t.dims();
    let t = t.value();
    // Points of I_0 not visible in I_1 (I_0's grid) and vice versa.
    let lost_from_0 = inconsistency_map(f10, f01)?;
    let lost_from_1 = inconsistency_map(f01, f10)?;
    let mut weights = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let d0 = f0t.get(y, x);
            let d1 = f1t.get(y, x);
            let only_in_0 = sample_map(&lost_from_0, h, w, x as f64 + d0[0], y as f64 + d0[1]);
            let only_in_1 = sample_map(&lost_from_1, h, w, x as f64 + d1[0], y as f64 + d1[1]);
            let w0 = (1.0 - t) * (1.0 - only_in_1);
            let w1 = t * (1.0 - only_in_0);
            let m = if w0 + w1 > 1e-12 {
                w0 / (w0 + w1)
            } else {
                1.0 - t
            };
            weights.push(m.clamp(0.0, 1.0));
        }
    }
    BlendMask::from_vec(h, w, weights)
}

/// A synthesized intermediate frame together with the pieces it was blended from.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOutput {
    pub frame: Image,
    pub mask: BlendMask,
    pub warped_from_0: Image,
    pub warped_from_1: Image,
}

/// `mask ⊙ g(I0, f0t) + (1 − mask) ⊙ g(I1, f1t)`.
pub fn synthesize(
    i0: &Image,
    i1: &Image,
    f0t: &FlowField,
    f1t: &FlowField,
    mask: &BlendMask,
) -> Result<SynthesisOutput> {
    i0.same_dims(i1)?;
    let warped_from_0 = warp_bilinear(i0, f0t)?;
    let warped_from_1 = warp_bilinear(i1, f1t)?;
    blend(warped_from_0, warped_from_1, mask)
}

/// Blends two already-warped frames.
pub fn blend(
    warped_from_0: Image,
    warped_from_1: Image,
    mask: &BlendMask,
) -> Result<SynthesisOutput> {
    warped_from_0.same_dims(&warped_from_1)?;
    let (h, w, ch) = warped_from_0.dims();
    if mask.dims() != (h, w) {
        return Err(crate::Error::DimensionMismatch {
            expected: (h, w, 1),
            actual: (mask.dims().0, mask.dims().1, 1),
        });
    }
    let frame = Image::from_fn(h, w, ch, |y, x, c| {
        let m = mask.get(y, x);
        m * warped_from_0.get(y, x, c) + (1.0 - m) * warped_from_1.get(y, x, c)
    })?;
    Ok(SynthesisOutput {
        frame,
        mask: mask.clone(),
        warped_from_0,
        warped_from_1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn textured(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, 3, |y, x, c| {
            (0.5 + 0.3 * libm::sin(0.7 * x as f64 + 0.3 * y as f64 + c as f64)).clamp(0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn zero_flow_is_identity() {
        let img = textured(9, 11);
        let out = warp_bilinear(&img, &FlowField::zeros(9, 11).unwrap()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn ramp_shift() {
        let w = 10;
        let ramp = Image::from_fn(4, w, 1, |_, x, _| x as f64 / (w - 1) as f64).unwrap();
        let out = warp_bilinear(&ramp, &FlowField::constant(4, w, [1.0, 0.0]).unwrap()).unwrap();
        for y in 0..4 {
            for x in 0..w - 1 {
                let want = (x + 1) as f64 / (w - 1) as f64;
                assert!((out.get(y, x, 0) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn far_flow_clamps_to_edge() {
        let img = textured(6, 7);
        let out =
            warp_bilinear(&img, &FlowField::constant(6, 7, [100.0, -100.0]).unwrap()).unwrap();
        for y in 0..6 {
            for x in 0..7 {
                assert_eq!(out.get(y, x, 1), img.get(0, 6, 1));
            }
        }
    }

    #[test]
    fn integer_flow_is_exact_shift() {
        let img = textured(8, 8);
        let out = warp_bilinear(&img, &FlowField::constant(8, 8, [-2.0, 1.0]).unwrap()).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let want = img.get_clamped(y as isize + 1, x as isize - 2, 0);
                assert_eq!(out.get(y, x, 0), want);
            }
        }
    }

    #[test]
    fn masks_for_consistent_zero_flow() {
        let z = FlowField::zeros(5, 5).unwrap();
        let m = default_blend_mask(&z, &z, TimeStamp::new(1, 2).unwrap(), &z, &z).unwrap();
        assert!(m.weights().iter().all(|&w| w == 0.5));
        let m = default_blend_mask(&z, &z, TimeStamp::eighth(1).unwrap(), &z, &z).unwrap();
        assert!(m.weights().iter().all(|&w| w == 0.875));
    }

    #[test]
    fn synthesis_examples() {
        let c = Image::new(6, 6, 1, 0.42).unwrap();
        let f = FlowField::constant(6, 6, [0.3, -1.7]).unwrap();
        let g = FlowField::constant(6, 6, [-2.2, 0.4]).unwrap();
        let m = BlendMask::constant(6, 6, 0.3).unwrap();
        let out = synthesize(&c, &c, &f, &g, &m).unwrap();
        assert!(out.frame.data().iter().all(|v| (v - 0.42).abs() < 1e-15));

        let a = textured(6, 6);
        let b = a.map(|v| 1.0 - v);
        let ones = BlendMask::constant(6, 6, 1.0).unwrap();
        let out = synthesize(&a, &b, &f, &g, &ones).unwrap();
        assert_eq!(out.frame, warp_bilinear(&a, &f).unwrap());

        let z = FlowField::zeros(6, 6).unwrap();
        let half = BlendMask::constant(6, 6, 0.5).unwrap();
        let out = synthesize(&a, &a, &z, &z, &half).unwrap();
        for (p, q) in out.frame.data().iter().zip(a.data()) {
            assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = textured(4, 4);
        assert!(warp_bilinear(&a, &FlowField::zeros(4, 5).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn synthesis_is_convex(seed in 0u64..1000, m in 0.0f64..=1.0,
                               dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
            let a = Image::from_fn(5, 6, 1, |y, x, _| ((seed as usize * 7 + y * 13 + x * 29) % 101) as f64 / 100.0).unwrap();
            let b = Image::from_fn(5, 6, 1, |y, x, _| ((seed as usize * 3 + y * 31 + x * 17) % 97) as f64 / 96.0).unwrap();
            let f = FlowField::constant(5, 6, [dx, dy]).unwrap();
            let g = FlowField::constant(5, 6, [-dy, dx]).unwrap();
            let out = synthesize(&a, &b, &f, &g, &BlendMask::constant(5, 6, m).unwrap()).unwrap();
            for k in 0..out.frame.data().len() {
                let (p, q) = (out.warped_from_0.data()[k], out.warped_from_1.data()[k]);
                let v = out.frame.data()[k];
                prop_assert!(v >= p.min(q) - 1e-15 && v <= p.max(q) + 1e-15);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
