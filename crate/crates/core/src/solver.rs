//! Two-stage, coarse-to-fine optical flow between the input frames.
//!
//! Each pair is solved with a Horn–Schunck style energy: a linearized
//! brightness-constancy data term plus quadratic smoothness, minimized by
//! Gauss–Seidel sweeps. Every scale re-linearizes a few times around the current
//! flow (incremental warping), and the flow is upsampled with doubled vectors to
//! seed the next finer scale.
//!
//! [`estimate_bundle`] runs the two stages: the first computes `f_{0→-1}`,
//! `f_{1→2}`, `f_{0→2}` and `f_{1→-1}` from scratch; the second computes `f_{0→1}`
//! and `f_{1→0}` with the finest scale started from `−f_{0→-1}` and `−f_{1→2}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::Image;
use crate::types::InputQuad;

/// Solver parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FlowSolverConfig {
    /// Pyramid depth, finest included.
    pub num_scales: usize,
    /// Gauss–Seidel sweeps per linearization.
    pub iterations_per_scale: usize,
    /// Weight of the smoothness term, on the 0–255 intensity scale (classic
    /// Horn–Schunck `α`).
    pub smoothness_weight: f64,
    /// Re-linearizations (image re-warps) per scale.
    pub warp_updates_per_scale: usize,
    /// Overrides the sweep count at the finest scale. `Some(0)` returns the
    /// starting flow of the finest scale untouched.
    pub finest_iterations: Option<usize>,
}

impl Default for FlowSolverConfig {
    fn default() -> Self {
        Self {
            num_scales: 3,
            iterations_per_scale: 100,
            smoothness_weight: 15.0,
            warp_updates_per_scale: 3,
            finest_iterations: None,
        }
    }
}

impl FlowSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_scales == 0 {
            return Err(Error::InvalidConfig("num_scales must be at least 1".into()));
        }
        if self.iterations_per_scale == 0 {
            return Err(Error::InvalidConfig(
                "iterations_per_scale must be at least 1".into(),
            ));
        }
        if !(self.smoothness_weight.is_finite() && self.smoothness_weight > 0.0) {
            return Err(Error::InvalidConfig(
                "smoothness_weight must be positive".into(),
            ));
        }
        if self.warp_updates_per_scale == 0 {
            return Err(Error::InvalidConfig(
                "warp_updates_per_scale must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `α²` for intensities in `[0, 1]`.
    fn alpha_sq(&self) -> f64 {
        let a = self.smoothness_weight / 255.0;
        a * a
    }
}

/// The six inter-input flows consumed by the motion models.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowBundle {
    pub f_0_to_m1: FlowField,
    pub f_0_to_1: FlowField,
    pub f_0_to_2: FlowField,
    pub f_1_to_0: FlowField,
    pub f_1_to_m1: FlowField,
    pub f_1_to_2: FlowField,
}

impl FlowBundle {
    pub fn dims(&self) -> (usize, usize) {
        self.f_0_to_1.dims()
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.f_0_to_1;
        for f in [
            &self.f_0_to_m1,
            &self.f_0_to_2,
            &self.f_1_to_0,
            &self.f_1_to_m1,
            &self.f_1_to_2,
        ] {
            r.same_dims(f)?;
        }
        Ok(())
    }

    /// Named fields in a fixed order, for serialization.
    pub fn named(&self) -> [(&'static str, &FlowField); 6] {
        [
            ("f_0_to_m1", &self.f_0_to_m1),
            ("f_0_to_1", &self.f_0_to_1),
            ("f_0_to_2", &self.f_0_to_2),
            ("f_1_to_0", &self.f_1_to_0),
            ("f_1_to_m1", &self.f_1_to_m1),
            ("f_1_to_2", &self.f_1_to_2),
        ]
    }

    /// The bundle of the time-reversed window `(I_2, I_1, I_0, I_{-1})`.
    pub fn reversed(&self) -> FlowBundle {
        FlowBundle {
            f_0_to_m1: self.f_1_to_2.clone(),
            f_0_to_1: self.f_1_to_0.clone(),
            f_0_to_2: self.f_1_to_m1.clone(),
            f_1_to_0: self.f_0_to_1.clone(),
            f_1_to_m1: self.f_0_to_2.clone(),
            f_1_to_2: self.f_0_to_m1.clone(),
        }
    }
}

/// Flow `f_{a→b}` with `b(x) ≈ a(x + f(x))`.
///
/// When `init` is given the coarse scales are skipped and the finest scale starts
/// from it.
pub fn estimate_pair_flow(
    a: &Image,
    b: &Image,
    init: Option<&FlowField>,
    cfg: &FlowSolverConfig,
) -> Result<FlowField> {
    a.same_dims(b)?;
    cfg.validate()?;
    if let Some(f) = init {
        f.check_dims(a.height(), a.width())?;
    }
    let finest_iters = cfg.finest_iterations.unwrap_or(cfg.iterations_per_scale);

    let ga = a.to_gray();
    let gb = b.to_gray();
    if let Some(f) = init {
        return Ok(refine_at_scale(&ga, &gb, f.clone(), finest_iters, cfg));
    }

    let mut pa = vec![ga];
    let mut pb = vec![gb];
    while pa.len() < cfg.num_scales {
        let last = pa.last().expect("non-empty pyramid");
        if last.height() < 8 || last.width() < 8 {
            break;
        }
        let na = last.downsample2()?;
        let nb = pb.last().expect("non-empty pyramid").downsample2()?;
        pa.push(na);
        pb.push(nb);
    }

    let coarsest = pa.len() - 1;
    let mut flow = FlowField::zeros(pa[coarsest].height(), pa[coarsest].width())?;
    for level in (0..pa.len()).rev() {
        if level != coarsest {
            flow = flow.upsample_to(pa[level].height(), pa[level].width())?;
        }
        let iters = if level == 0 {
            finest_iters
        } else {
            cfg.iterations_per_scale
        };
        flow = refine_at_scale(&pa[level], &pb[level], flow, iters, cfg);
    }
    Ok(flow)
}

/// Incremental warping at one scale, starting from `flow`.
fn refine_at_scale(
    a: &Image,
    b: &Image,
    mut flow: FlowField,
    iterations: usize,
    cfg: &FlowSolverConfig,
) -> FlowField {
    if iterations == 0 {
        return flow;
    }
    let (h, w) = (a.height(), a.width());
    let n = h * w;
    let alpha_sq = cfg.alpha_sq();
    let (gbx, gby) = gradients(b);

    for _ in 0..cfg.warp_updates_per_scale {
        // Linearize a(x + u + du) around the current flow.
        let mut aw = vec![0.0; n];
        let mut valid = vec![true; n];
        for y in 0..h {
            for x in 0..w {
                let d = flow.get(y, x);
                let (sx, sy) = (x as f64 + d[0], y as f64 + d[1]);
                aw[y * w + x] = a.sample_bilinear(sx, sy, 0);
                valid[y * w + x] =
                    sx >= 0.0 && sy >= 0.0 && sx <= (w - 1) as f64 && sy <= (h - 1) as f64;
            }
        }
        let aw_img = Image::from_vec(h, w, 1, aw).expect("finite warp");
        let (gax, gay) = gradients(&aw_img);

        let mut ix = vec![0.0; n];
        let mut iy = vec![0.0; n];
        let mut it = vec![0.0; n];
        for k in 0..n {
            if valid[k] {
                ix[k] = 0.5 * (gax[k] + gbx[k]);
                iy[k] = 0.5 * (gay[k] + gby[k]);
                it[k] = aw_img.data()[k] - b.data()[k];
            }
        }

        let base: Vec<[f64; 2]> = flow.vectors().to_vec();
        let mut total = base.clone();
        for _ in 0..iterations {
            for y in 0..h {
                for x in 0..w {
                    let k = y * w + x;
                    let mut avg = [0.0; 2];
                    let mut cnt = 0.0;
                    if x > 0 {
                        add(&mut avg, total[k - 1]);
                        cnt += 1.0;
                    }
                    if x + 1 < w {
                        add(&mut avg, total[k + 1]);
                        cnt += 1.0;
                    }
                    if y > 0 {
                        add(&mut avg, total[k - w]);
                        cnt += 1.0;
                    }
                    if y + 1 < h {
                        add(&mut avg, total[k + w]);
                        cnt += 1.0;
                    }
                    if cnt == 0.0 {
                        continue;
                    }
                    let du = avg[0] / cnt - base[k][0];
                    let dv = avg[1] / cnt - base[k][1];
                    let r = (ix[k] * du + iy[k] * dv + it[k])
                        / (alpha_sq + ix[k] * ix[k] + iy[k] * iy[k]);
                    total[k] = [base[k][0] + du - ix[k] * r, base[k][1] + dv - iy[k] * r];
                }
            }
        }
        flow = median3(&FlowField::from_vec(h, w, total).expect("finite flow"));
    }
    flow
}

#[inline]
fn add(acc: &mut [f64; 2], v: [f64; 2]) {
    acc[0] += v[0];
    acc[1] += v[1];
}

/// Central differences with replicated borders.
fn gradients(img: &Image) -> (Vec<f64>, Vec<f64>) {
    let (h, w) = (img.height(), img.width());
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let (yi, xi) = (y as isize, x as isize);
            gx[y * w + x] = 0.5 * (img.get_clamped(yi, xi + 1, 0) - img.get_clamped(yi, xi - 1, 0));
            gy[y * w + x] = 0.5 * (img.get_clamped(yi + 1, xi, 0) - img.get_clamped(yi - 1, xi, 0));
        }
    }
    (gx, gy)
}

/// 3×3 per-component median with clamped borders.
fn median3(f: &FlowField) -> FlowField {
    let (h, w) = f.dims();
    let mut out = f.clone();
    let mut win = [[0.0f64; 9]; 2];
    for y in 0..h {
        for x in 0..w {
            let mut i = 0;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    let v = f.get(yy, xx);
                    win[0][i] = v[0];
                    win[1][i] = v[1];
                    i += 1;
                }
            }
            let mut m = [0.0; 2];
            for k in 0..2 {
                win[k].sort_by(f64::total_cmp);
                m[k] = win[k][4];
            }
            out.set(y, x, m);
        }
    }
    out
}

/// Runs both estimation stages over the window.
pub fn estimate_bundle(quad: &InputQuad, cfg: &FlowSolverConfig) -> Result<FlowBundle> {
    let (im1, i0, i1, i2) = (quad.prev(), quad.first(), quad.second(), quad.next());
    let f_0_to_m1 = estimate_pair_flow(i0, im1, None, cfg)?;
    let f_1_to_2 = estimate_pair_flow(i1, i2, None, cfg)?;
    let f_0_to_2 = estimate_pair_flow(i0, i2, None, cfg)?;
    let f_1_to_m1 = estimate_pair_flow(i1, im1, None, cfg)?;
    let f_0_to_1 = estimate_pair_flow(i0, i1, Some(&f_0_to_m1.neg()), cfg)?;
    let f_1_to_0 = estimate_pair_flow(i1, i0, Some(&f_1_to_2.neg()), cfg)?;
    Ok(FlowBundle {
        f_0_to_m1,
        f_0_to_1,
        f_0_to_2,
        f_1_to_0,
        f_1_to_m1,
        f_1_to_2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::endpoint_error;
    use crate::synth::{translation_scene, Scene};

    fn pair(v: [f64; 2], seed: u64) -> (Image, Image, FlowField) {
        let sc = Scene::new(translation_scene(seed, 48, v)).unwrap();
        (
            sc.render_frame(0.0).unwrap(),
            sc.render_frame(1.0).unwrap(),
            sc.ground_truth_flow(0.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn zero_motion() {
        let (a, _, _) = pair([0.0, 0.0], 1);
        let f = estimate_pair_flow(&a, &a, None, &FlowSolverConfig::default()).unwrap();
        assert!(f
            .vectors()
            .iter()
            .all(|v| v[0].abs() < 1e-9 && v[1].abs() < 1e-9));
    }

    #[test]
    fn recovers_translation() {
        let (a, b, gt) = pair([2.0, 0.0], 3);
        let f = estimate_pair_flow(&a, &b, None, &FlowSolverConfig::default()).unwrap();
        assert!(endpoint_error(&f, &gt).unwrap() < 0.5);
        // Opposite direction gives the negated flow.
        let r = estimate_pair_flow(&b, &a, None, &FlowSolverConfig::default()).unwrap();
        assert!(endpoint_error(&r, &gt.neg()).unwrap() < 0.5);
    }

    #[test]
    fn textureless_input_stays_finite() {
        let c = Image::new(20, 20, 1, 0.4).unwrap();
        let f = estimate_pair_flow(&c, &c, None, &FlowSolverConfig::default()).unwrap();
        assert!(f.vectors().iter().all(|v| *v == [0.0, 0.0]));
    }

    #[test]
    fn tolerates_small_brightness_offset() {
        let (a, b, gt) = pair([1.0, -1.0], 5);
        let b = b.map(|v| v + 0.01);
        let f = estimate_pair_flow(&a, &b, None, &FlowSolverConfig::default()).unwrap();
        assert!(endpoint_error(&f, &gt).unwrap() < 0.5);
    }

    #[test]
    fn rejects_bad_config() {
        let a = Image::new(8, 8, 1, 0.0).unwrap();
        let cfg = FlowSolverConfig {
            num_scales: 0,
            ..Default::default()
        };
        assert!(matches!(
            estimate_pair_flow(&a, &a, None, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        let b = Image::new(8, 9, 1, 0.0).unwrap();
        assert!(estimate_pair_flow(&a, &b, None, &FlowSolverConfig::default()).is_err());
    }

    #[test]
    fn bundle_on_translation() {
        let sc = Scene::new(translation_scene(9, 40, [1.0, 0.5])).unwrap();
        let b = estimate_bundle(&sc.quad().unwrap(), &FlowSolverConfig::default()).unwrap();
        let want = [
            (&b.f_0_to_m1, [-1.0, -0.5]),
            (&b.f_0_to_1, [1.0, 0.5]),
            (&b.f_0_to_2, [2.0, 1.0]),
            (&b.f_1_to_0, [-1.0, -0.5]),
            (&b.f_1_to_m1, [-2.0, -1.0]),
            (&b.f_1_to_2, [1.0, 0.5]),
        ];
        for (f, v) in want {
            let gt = FlowField::constant(40, 40, v).unwrap();
            assert!(endpoint_error(f, &gt).unwrap() < 0.5);
        }
        assert_eq!(b.reversed().reversed(), b);
    }

    #[test]
    fn stage_two_starts_from_negated_stage_one() {
        let sc = Scene::new(translation_scene(2, 32, [1.5, -0.5])).unwrap();
        let quad = sc.quad().unwrap();
        let cfg = FlowSolverConfig {
            finest_iterations: Some(0),
            ..Default::default()
        };
        let b = estimate_bundle(&quad, &cfg).unwrap();
        assert_eq!(b.f_0_to_1, b.f_0_to_m1.neg());
        assert_eq!(b.f_1_to_0, b.f_1_to_2.neg());
    }
}
