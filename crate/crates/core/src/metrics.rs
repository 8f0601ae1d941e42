//! Quality and consistency metrics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::Image;
use crate::math;

/// Side of the SSIM window.
pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Default neighbourhood radius of the relaxed warping loss.
pub const DEFAULT_RELAX_RADIUS: usize = 9;

/// PSNR in dB for peak 1.0; `f64::INFINITY` when the images are identical.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * math::log10(1.0 / mse))
}

fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(s / a.data().len() as f64)
}

/// Root-mean-squared difference on the 0–255 scale.
pub fn interpolation_error(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let s: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = 255.0 * x - 255.0 * y;
            d * d
        })
        .sum();
    Ok(math::sqrt(s / a.data().len() as f64))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let r = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = math::exp(-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Valid-region separable filtering of one plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h + 1 - SSIM_WINDOW, w + 1 - SSIM_WINDOW);
    let mut tmp = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            let mut s = 0.0;
            for (j, kv) in k.iter().enumerate() {
                s += kv * plane[y * w + x + j];
            }
            tmp[y * ow + x] = s;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            let mut s = 0.0;
            for (j, kv) in k.iter().enumerate() {
                s += kv * tmp[(y + j) * ow + x];
            }
            out[y * ow + x] = s;
        }
    }
    out
}

/// Mean SSIM over all 11×11 Gaussian windows (σ = 1.5) lying inside the image,
/// averaged over channels. Dynamic range 1.0.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let (h, w, ch) = a.dims();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::TooSmall {
            height: h,
            width: w,
            min: SSIM_WINDOW,
        });
    }
    let c1 = (SSIM_K1 * 1.0) * (SSIM_K1 * 1.0);
    let c2 = (SSIM_K2 * 1.0) * (SSIM_K2 * 1.0);
    let k = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for c in 0..ch {
        let pa: Vec<f64> = (0..h * w).map(|i| a.data()[i * ch + c]).collect();
        let pb: Vec<f64> = (0..h * w).map(|i| b.data()[i * ch + c]).collect();
        let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
        let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
        let ab: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let mu_a = filter_valid(&pa, h, w, &k);
        let mu_b = filter_valid(&pb, h, w, &k);
        let e_aa = filter_valid(&aa, h, w, &k);
        let e_bb = filter_valid(&bb, h, w, &k);
        let e_ab = filter_valid(&ab, h, w, &k);
        for i in 0..mu_a.len() {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Temporal change consistency: mean SSIM between the absolute frame-to-frame
/// differences of `f` and of `g`.
pub fn tcc(f: &[Image], g: &[Image]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    if f.len() < 2 {
        return Err(Error::LengthMismatch(f.len(), 2));
    }
    let mut s = 0.0;
    for i in 0..f.len() - 1 {
        let df = f[i].zip_map(&f[i + 1], |x, y| math::abs(x - y))?;
        let dg = g[i].zip_map(&g[i + 1], |x, y| math::abs(x - y))?;
        s += ssim(&df, &dg)?;
    }
    Ok(s / (f.len() - 1) as f64)
}

/// Relaxed L1 warping loss, as a total and a per-pixel mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedLoss {
    pub sum: f64,
    pub mean: f64,
}

/// For every pixel, the smallest channel-summed L1 distance between `warped` and
/// `target` shifted by any `(m, n) ∈ [−d, d]²`; target indices are clamped.
pub fn relaxed_warp_loss(warped: &Image, target: &Image, d: usize) -> Result<RelaxedLoss> {
    warped.same_dims(target)?;
    let (h, w, ch) = warped.dims();
    let r = d as isize;
    let mut sum = 0.0;
    for i in 0..h {
        for j in 0..w {
            let mut best = f64::INFINITY;
            for m in -r..=r {
                for n in -r..=r {
                    let mut l1 = 0.0;
                    for c in 0..ch {
                        l1 += math::abs(
                            warped.get(i, j, c)
                                - target.get_clamped(i as isize + m, j as isize + n, c),
                        );
                    }
                    if l1 < best {
                        best = l1;
                    }
                }
            }
            sum += best;
        }
    }
    Ok(RelaxedLoss {
        sum,
        mean: sum / (h * w) as f64,
    })
}

/// Plain L1 warping loss, summed over pixels and channels.
pub fn l1_loss(a: &Image, b: &Image) -> Result<f64> {
    a.same_dims(b)?;
    let (h, w, ch) = a.dims();
    let mut sum = 0.0;
    for i in 0..h {
        for j in 0..w {
            let mut l1 = 0.0;
            for c in 0..ch {
                l1 += math::abs(a.get(i, j, c) - b.get(i, j, c));
            }
            sum += l1;
        }
    }
    Ok(sum)
}

/// Mean Euclidean distance between corresponding vectors.
pub fn endpoint_error(f: &FlowField, g: &FlowField) -> Result<f64> {
    f.same_dims(g)?;
    let s: f64 = f
        .vectors()
        .iter()
        .zip(g.vectors())
        .map(|(a, b)| math::hypot(a[0] - b[0], a[1] - b[1]))
        .sum();
    Ok(s / f.vectors().len() as f64)
}

/// Per-frame and aggregate scores of a generated sequence against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub ie: Vec<f64>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    pub mean_ie: f64,
    /// Present when the sequence has at least two frames.
    pub tcc: Option<f64>,
    pub relaxed_loss: Option<f64>,
    pub epe: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Scores `generated` against `truth` frame by frame.
pub fn evaluate_sequence(generated: &[Image], truth: &[Image]) -> Result<MetricsReport> {
    if generated.len() != truth.len() {
        return Err(Error::LengthMismatch(generated.len(), truth.len()));
    }
    if generated.is_empty() {
        return Err(Error::LengthMismatch(0, 1));
    }
    let mut p = Vec::new();
    let mut s = Vec::new();
    let mut e = Vec::new();
    for (a, b) in generated.iter().zip(truth) {
        p.push(psnr(a, b)?);
        s.push(ssim(a, b)?);
        e.push(interpolation_error(a, b)?);
    }
    let tcc = if generated.len() >= 2 {
        Some(tcc(generated, truth)?)
    } else {
        None
    };
    Ok(MetricsReport {
        mean_psnr: mean(&p),
        mean_ssim: mean(&s),
        mean_ie: mean(&e),
        psnr: p,
        ssim: s,
        ie: e,
        tcc,
        relaxed_loss: None,
        epe: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(h: usize, w: usize, ch: usize, seed: f64) -> Image {
        Image::from_fn(h, w, ch, |y, x, c| {
            let v = 0.5
                + 0.2 * libm::sin(0.37 * x as f64 + seed)
                + 0.15 * libm::cos(0.23 * y as f64 + 0.5 * c as f64)
                + 0.1 * libm::sin(0.11 * (x * y) as f64);
            v.clamp(0.0, 1.0)
        })
        .unwrap()
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Image::new(8, 8, 1, 0.3).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        let b = a.map(|v| v + 0.01);
        assert!((psnr(&a, &b).unwrap() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn ie_closed_forms() {
        let a = Image::new(4, 4, 3, 0.5).unwrap();
        assert_eq!(interpolation_error(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 0.1);
        assert!((interpolation_error(&a, &b).unwrap() - 25.5).abs() < 1e-9);
        let half = Image::from_fn(4, 4, 1, |_, x, _| if x < 2 { 0.7 } else { 0.5 }).unwrap();
        let base = Image::new(4, 4, 1, 0.5).unwrap();
        let want = 255.0 * 0.2 / libm::sqrt(2.0);
        assert!((interpolation_error(&half, &base).unwrap() - want).abs() < 1e-9);
    }

    // Direct, non-separable SSIM used as an independent reference.
    #[allow(clippy::needless_range_loop)]
    fn reference_ssim(a: &Image, b: &Image) -> f64 {
        let (h, w, ch) = a.dims();
        let mut g = [[0.0; 11]; 11];
        let mut s = 0.0;
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
                *v = libm::exp(-(di * di + dj * dj) / 4.5);
                s += *v;
            }
        }
        let (c1, c2) = (0.0001, 0.0009);
        let mut total = 0.0;
        let mut n = 0.0;
        for c in 0..ch {
            for y in 0..=h - 11 {
                for x in 0..=w - 11 {
                    let (mut ma, mut mb, mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for i in 0..11 {
                        for j in 0..11 {
                            let k = g[i][j] / s;
                            let (p, q) = (a.get(y + i, x + j, c), b.get(y + i, x + j, c));
                            ma += k * p;
                            mb += k * q;
                            aa += k * p * p;
                            bb += k * q * q;
                            ab += k * p * q;
                        }
                    }
                    let (va, vb, cv) = (aa - ma * ma, bb - mb * mb, ab - ma * mb);
                    total += (2.0 * ma * mb + c1) * (2.0 * cv + c2)
                        / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                    n += 1.0;
                }
            }
        }
        total / n
    }

    #[test]
    fn ssim_cases() {
        let a = textured(64, 64, 1, 0.0);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        let c = Image::new(16, 16, 1, 0.5).unwrap();
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
        let b = a.map(|v| 0.5 + 0.5 * (v - 0.5));
        let s = ssim(&a, &b).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!((s - reference_ssim(&a, &b)).abs() < 1e-6);
        let rgb = textured(20, 24, 3, 1.0);
        let rgb2 = textured(20, 24, 3, 1.3);
        assert!((ssim(&rgb, &rgb2).unwrap() - reference_ssim(&rgb, &rgb2)).abs() < 1e-6);
        assert!(matches!(
            ssim(
                &Image::new(10, 40, 1, 0.0).unwrap(),
                &Image::new(10, 40, 1, 0.0).unwrap()
            ),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn tcc_identities() {
        let f: Vec<Image> = (0..7)
            .map(|k| textured(16, 16, 1, k as f64 * 0.4))
            .collect();
        assert_eq!(tcc(&f, &f).unwrap(), 1.0);
        let s: Vec<Image> = (0..7).map(|_| textured(16, 16, 1, 0.0)).collect();
        let s2: Vec<Image> = (0..7).map(|_| textured(16, 16, 1, 2.0)).collect();
        assert_eq!(tcc(&s, &s2).unwrap(), 1.0);
        assert!(tcc(&f[..6], &f).is_err());
    }

    #[test]
    fn relaxed_loss_cases() {
        let a = textured(12, 13, 3, 0.0);
        let b = textured(12, 13, 3, 0.9);
        for d in [0, 1, 3] {
            assert_eq!(relaxed_warp_loss(&a, &a, d).unwrap().sum, 0.0);
        }
        let r0 = relaxed_warp_loss(&a, &b, 0).unwrap();
        assert_eq!(r0.sum, l1_loss(&a, &b).unwrap());
        assert_eq!(r0.mean, r0.sum / (12.0 * 13.0));

        // target = warped shifted one pixel to the right
        let shifted = Image::from_fn(12, 13, 3, |y, x, c| {
            a.get_clamped(y as isize, x as isize - 1, c)
        })
        .unwrap();
        let r1 = relaxed_warp_loss(&a, &shifted, 1).unwrap();
        assert!(r1.sum <= l1_loss(&a, &shifted).unwrap());
        // interior pixels find their exact match
        for y in 0..12 {
            for x in 0..12 {
                let mut best = f64::INFINITY;
                for m in -1isize..=1 {
                    for n in -1isize..=1 {
                        let mut l = 0.0;
                        for c in 0..3 {
                            l += (a.get(y, x, c)
                                - shifted.get_clamped(y as isize + m, x as isize + n, c))
                            .abs();
                        }
                        best = best.min(l);
                    }
                }
                assert_eq!(best, 0.0);
            }
        }
    }

    #[test]
    fn epe_cases() {
        let z = FlowField::zeros(3, 3).unwrap();
        assert_eq!(endpoint_error(&z, &z).unwrap(), 0.0);
        let one = FlowField::constant(3, 3, [1.0, 0.0]).unwrap();
        assert_eq!(endpoint_error(&one, &z).unwrap(), 1.0);
        let f = FlowField::constant(3, 3, [3.0, 4.0]).unwrap();
        assert_eq!(endpoint_error(&f, &z).unwrap(), 5.0);
    }

    #[test]
    fn perturbations_are_monotone() {
        let a = textured(16, 16, 1, 0.0);
        let mut last_p = f64::INFINITY;
        let mut last_e = 0.0;
        for k in 1..6 {
            let b = a.map(|v| v + 0.01 * k as f64);
            let (p, e) = (psnr(&a, &b).unwrap(), interpolation_error(&a, &b).unwrap());
            assert!(p < last_p && e > last_e);
            last_p = p;
            last_e = e;
        }
    }
}
