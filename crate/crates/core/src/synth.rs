//! Analytic motion and rendered scenes with exact ground truth.
//!
//! A layer following trajectory `p` is rendered at time `t` as `layer(x + p(t))`,
//! so the ground-truth flow from time `a` to time `b` over that layer is
//! `p(b) − p(a)` in the crate's flow convention (`frame_b(x) = frame_a(x + f)`).

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::Image;
use crate::math;
use crate::motion::{predict_scalar, MotionModelKind};
use crate::types::{InputQuad, TimeStamp};

/// Per-axis polynomial `c0 + c1·t + c2·t² + c3·t³ (+ c4·t⁴)` in pixels, with `t`
/// in input frame intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectorySpec {
    pub x: [f64; 4],
    pub y: [f64; 4],
    /// Optional fourth-order terms `[c4_x, c4_y]`, used by the relaxation experiments.
    #[cfg_attr(feature = "serde", serde(default))]
    pub quartic: [f64; 2],
}

/// Named coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TrajectoryPreset {
    ConstantVelocity,
    ConstantAcceleration,
    VariableAcceleration,
}

impl TrajectoryPreset {
    pub const ALL: [TrajectoryPreset; 3] = [
        TrajectoryPreset::ConstantVelocity,
        TrajectoryPreset::ConstantAcceleration,
        TrajectoryPreset::VariableAcceleration,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryPreset::ConstantVelocity => "constant-velocity",
            TrajectoryPreset::ConstantAcceleration => "constant-acceleration",
            TrajectoryPreset::VariableAcceleration => "variable-acceleration",
        }
    }

    /// A fixed representative of the family.
    pub fn canonical(&self) -> TrajectorySpec {
        match self {
            TrajectoryPreset::ConstantVelocity => {
                TrajectorySpec::new([0.0, 1.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0])
            }
            TrajectoryPreset::ConstantAcceleration => {
                TrajectorySpec::new([0.0, 0.5, 0.5, 0.0], [0.0, -0.25, 0.25, 0.0])
            }
            TrajectoryPreset::VariableAcceleration => {
                TrajectorySpec::new([0.0, 0.5, 0.3, 0.4], [0.0, 0.2, -0.1, -0.2])
            }
        }
    }

    /// Random member of the family, scaled by `scale`.
    ///
    /// In the variable-acceleration family `c2` and `c3` are nonzero and share a
    /// sign on each axis, so the quadratic model is strictly better than the
    /// linear one and strictly worse than the cubic one everywhere in `(0, 1)`.
    pub fn sample<R: Rng>(&self, rng: &mut R, scale: f64) -> TrajectorySpec {
        let axis = |rng: &mut R| -> [f64; 4] {
            let s1 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let s2 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let c1 = s1 * rng.random_range(0.25..0.75);
            match self {
                TrajectoryPreset::ConstantVelocity => [0.0, c1, 0.0, 0.0],
                TrajectoryPreset::ConstantAcceleration => {
                    [0.0, c1, s2 * rng.random_range(0.15..0.4), 0.0]
                }
                TrajectoryPreset::VariableAcceleration => [
                    0.0,
                    c1,
                    s2 * rng.random_range(0.15..0.3),
                    s2 * rng.random_range(0.2..0.4),
                ],
            }
        };
        let x = axis(rng).map(|c| c * scale);
        let y = axis(rng).map(|c| c * scale * 0.5);
        TrajectorySpec::new(x, y)
    }
}

fn poly(c: &[f64; 4], q: f64, t: f64) -> f64 {
    c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * q)))
}

impl TrajectorySpec {
    pub fn new(x: [f64; 4], y: [f64; 4]) -> Self {
        Self {
            x,
            y,
            quartic: [0.0, 0.0],
        }
    }

    pub fn stationary() -> Self {
        Self::new([0.0; 4], [0.0; 4])
    }

    pub fn with_quartic(mut self, q: [f64; 2]) -> Self {
        self.quartic = q;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.quartic)
            .all(|v| v.is_finite())
    }

    #[inline]
    pub fn position(&self, t: f64) -> [f64; 2] {
        [
            poly(&self.x, self.quartic[0], t),
            poly(&self.y, self.quartic[1], t),
        ]
    }

    /// `p(to) − p(from)`.
    #[inline]
    pub fn displacement(&self, from: f64, to: f64) -> [f64; 2] {
        let (a, b) = (self.position(from), self.position(to));
        [b[0] - a[0], b[1] - a[1]]
    }

    /// Per-axis `(min, max)` of the position over `[t0, t1]`.
    pub fn bounds(&self, t0: f64, t1: f64) -> [(f64, f64); 2] {
        const STEPS: usize = 3000;
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for k in 0..=STEPS {
            let t = t0 + (t1 - t0) * k as f64 / STEPS as f64;
            let p = self.position(t);
            for a in 0..2 {
                b[a].0 = b[a].0.min(p[a]);
                b[a].1 = b[a].1.max(p[a]);
            }
        }
        b
    }
}

/// Exact polynomial positions at `times`.
pub fn sample_positions(spec: &TrajectorySpec, times: &[f64]) -> Vec<[f64; 2]> {
    times.iter().map(|&t| spec.position(t)).collect()
}

/// Absolute per-axis prediction errors of the three models at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelErrors {
    pub t: f64,
    /// `t` lies outside `(0, 1)`.
    pub extrapolated: bool,
    pub linear: [f64; 2],
    pub quadratic: [f64; 2],
    pub cubic: [f64; 2],
}

impl ModelErrors {
    pub fn get(&self, kind: MotionModelKind) -> [f64; 2] {
        match kind {
            MotionModelKind::Linear => self.linear,
            MotionModelKind::Quadratic => self.quadratic,
            MotionModelKind::Cubic => self.cubic,
        }
    }
}

fn predict_point(flows: &[[f64; 2]; 3], t: f64, kind: MotionModelKind) -> [f64; 2] {
    let [f01, f0m1, f02] = flows;
    [
        predict_scalar(f01[0], f0m1[0], f02[0], t, kind),
        predict_scalar(f01[1], f0m1[1], f02[1], t, kind),
    ]
}

fn exact_flows(spec: &TrajectorySpec) -> [[f64; 2]; 3] {
    [
        spec.displacement(0.0, 1.0),
        spec.displacement(0.0, -1.0),
        spec.displacement(0.0, 2.0),
    ]
}

/// Runs all three models on exact flows sampled at `t ∈ {−1, 0, 1, 2}` and reports
/// their errors against the trajectory, with `I_0` as reference.
pub fn toy_model_comparison(spec: &TrajectorySpec, eval_times: &[f64]) -> Vec<ModelErrors> {
    let flows = exact_flows(spec);
    eval_times
        .iter()
        .map(|&t| {
            let truth = spec.displacement(0.0, t);
            let err = |kind| {
                let p = predict_point(&flows, t, kind);
                [math::abs(p[0] - truth[0]), math::abs(p[1] - truth[1])]
            };
            ModelErrors {
                t,
                extrapolated: !(t > 0.0 && t < 1.0),
                linear: err(MotionModelKind::Linear),
                quadratic: err(MotionModelKind::Quadratic),
                cubic: err(MotionModelKind::Cubic),
            }
        })
        .collect()
}

/// Outcome of the flow-relaxation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSummary {
    /// MSE over the seven middle points with exact flows.
    pub unperturbed_mse: f64,
    /// Best MSE found with the sample points moved within the radius.
    pub perturbed_mse: f64,
    /// Offsets applied to `P_{-1}`, `P_1`, `P_2` in the best trial.
    pub offsets: [[f64; 2]; 3],
}

fn middle_mse(spec: &TrajectorySpec, flows: &[[f64; 2]; 3], kind: MotionModelKind) -> f64 {
    let mut s = 0.0;
    for i in 1..8 {
        let t = i as f64 / 8.0;
        let p = predict_point(flows, t, kind);
        let g = spec.displacement(0.0, t);
        s += (p[0] - g[0]) * (p[0] - g[0]) + (p[1] - g[1]) * (p[1] - g[1]);
    }
    s / 7.0
}

/// Randomly perturbs the points `P_{-1}`, `P_1`, `P_2` within `radius` (the first
/// trial is unperturbed) and keeps the perturbation that predicts the seven middle
/// positions best.
pub fn relaxation_experiment(
    spec: &TrajectorySpec,
    kind: MotionModelKind,
    radius: f64,
    trials: usize,
    seed: u64,
) -> RelaxationSummary {
    let exact = exact_flows(spec);
    let unperturbed_mse = middle_mse(spec, &exact, kind);
    let mut best = RelaxationSummary {
        unperturbed_mse,
        perturbed_mse: unperturbed_mse,
        offsets: [[0.0; 2]; 3],
    };
    if radius <= 0.0 {
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..trials {
        let mut offsets = [[0.0; 2]; 3];
        for o in &mut offsets {
            let r = radius * math::sqrt(rng.random::<f64>());
            let a = rng.random::<f64>() * core::f64::consts::TAU;
            *o = [r * libm::cos(a), r * libm::sin(a)];
        }
        // exact order: f01, f0m1, f02 ↔ P_1, P_{-1}, P_2
        let mut flows = exact;
        flows[0] = [exact[0][0] + offsets[1][0], exact[0][1] + offsets[1][1]];
        flows[1] = [exact[1][0] + offsets[0][0], exact[1][1] + offsets[0][1]];
        flows[2] = [exact[2][0] + offsets[2][0], exact[2][1] + offsets[2][1]];
        let mse = middle_mse(spec, &flows, kind);
        if mse < best.perturbed_mse {
            best.perturbed_mse = mse;
            best.offsets = offsets;
        }
    }
    best
}

/// Band-limited noise texture.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TextureSpec {
    pub seed: u64,
    /// Standard deviation of the Gaussian low-pass, in pixels.
    pub blur: f64,
    /// Peak-to-peak range of the normalized texture, centred on 0.5.
    pub contrast: f64,
}

impl Default for TextureSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            blur: 1.5,
            contrast: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpriteShape {
    /// Smooth Gaussian bump.
    Blob,
    /// Square of its own noise texture.
    #[default]
    Patch,
}

/// A square sprite drawn over the background with a 1-px soft edge.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpriteSpec {
    pub shape: SpriteShape,
    /// Side length in pixels.
    pub size: f64,
    /// Top-left corner in the image where the trajectory is zero.
    pub anchor: [f64; 2],
    pub trajectory: TrajectorySpec,
    #[cfg_attr(feature = "serde", serde(default))]
    pub texture: TextureSpec,
}

/// Description of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub channels: usize,
    pub background: TextureSpec,
    /// Motion of the whole background layer.
    pub global_motion: TrajectorySpec,
    #[cfg_attr(feature = "serde", serde(default))]
    pub sprite: Option<SpriteSpec>,
}

#[cfg(feature = "serde")]
fn one() -> usize {
    1
}

/// Time range over which sprites must stay inside the canvas.
pub const SCENE_TIME_RANGE: (f64, f64) = (-1.0, 2.0);

impl SceneSpec {
    pub fn static_scene(height: usize, width: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            channels: 1,
            background: TextureSpec {
                seed,
                ..TextureSpec::default()
            },
            global_motion: TrajectorySpec::stationary(),
            sprite: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 4 || self.height < 4 || !(self.channels == 1 || self.channels == 3) {
            return Err(Error::InvalidDimension(alloc::format!(
                "scene {}x{}x{}",
                self.height,
                self.width,
                self.channels
            )));
        }
        if !self.global_motion.is_finite()
            || self.background.blur.is_nan()
            || self.background.blur < 0.0
        {
            return Err(Error::NonFinite("scene background"));
        }
        if let Some(s) = &self.sprite {
            if !s.trajectory.is_finite() || s.size.is_nan() || s.size <= 1.0 {
                return Err(Error::NonFinite("sprite"));
            }
            let (t0, t1) = SCENE_TIME_RANGE;
            let b = s.trajectory.bounds(t0, t1);
            let dims = [self.width as f64, self.height as f64];
            for a in 0..2 {
                // On-screen box is [anchor − p, anchor − p + size].
                let lo = s.anchor[a] - b[a].1;
                let hi = s.anchor[a] - b[a].0 + s.size;
                if lo < 1.0 || hi > dims[a] - 1.0 {
                    return Err(Error::Clipping(alloc::format!(
                        "sprite spans [{lo:.2}, {hi:.2}] on axis {a}, canvas is [1, {}]",
                        dims[a] - 1.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Seeded noise grid, Gaussian-blurred and normalized to `0.5 ± contrast/2`.
fn noise_grid(h: usize, w: usize, ch: usize, tex: &TextureSpec) -> Result<Image> {
    let mut rng = ChaCha8Rng::seed_from_u64(tex.seed);
    let raw: Vec<f64> = (0..h * w * ch).map(|_| rng.random::<f64>()).collect();
    let mut img = Image::from_vec(h, w, ch, raw)?;
    if tex.blur > 0.0 {
        img = gaussian_blur(&img, tex.blur)?;
    }
    let (lo, hi) = img
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| {
            (l.min(v), u.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let c = tex.contrast.clamp(0.0, 1.0);
    Ok(img.map(|v| 0.5 - c / 2.0 + c * (v - lo) / span))
}

fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    let r = libm::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let (h, w, ch) = img.dims();
    let horiz = Image::from_fn(h, w, ch, |y, x, c| {
        k.iter()
            .enumerate()
            .map(|(j, kv)| kv * img.get_clamped(y as isize, x as isize + j as isize - r, c))
            .sum()
    })?;
    Image::from_fn(h, w, ch, |y, x, c| {
        k.iter()
            .enumerate()
            .map(|(j, kv)| kv * horiz.get_clamped(y as isize + j as isize - r, x as isize, c))
            .sum()
    })
}

/// A validated scene with its textures generated.
#[derive(Debug, Clone)]
pub struct Scene {
    spec: SceneSpec,
    background: Image,
    margin: f64,
    sprite: Option<Image>,
}

impl Scene {
    pub fn new(spec: SceneSpec) -> Result<Self> {
        spec.validate()?;
        let (t0, t1) = SCENE_TIME_RANGE;
        let b = spec.global_motion.bounds(t0, t1);
        let reach = b
            .iter()
            .map(|(lo, hi)| math::abs(*lo).max(math::abs(*hi)))
            .fold(0.0, f64::max);
        let margin = math::floor(reach) + 3.0;
        let m = margin as usize;
        let background = noise_grid(
            spec.height + 2 * m,
            spec.width + 2 * m,
            spec.channels,
            &spec.background,
        )?;
        let sprite = match &spec.sprite {
            Some(s) if s.shape == SpriteShape::Patch => {
                let n = libm::ceil(s.size) as usize + 2;
                Some(noise_grid(n, n, spec.channels, &s.texture)?)
            }
            _ => None,
        };
        Ok(Self {
            spec,
            background,
            margin,
            sprite,
        })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    /// Sprite coverage in `[0, 1]` at continuous image position `(x, y)`.
    fn sprite_alpha(&self, x: f64, y: f64, t: f64) -> f64 {
        match &self.spec.sprite {
            None => 0.0,
            Some(s) => {
                let p = s.trajectory.position(t);
                let u = x - s.anchor[0] + p[0];
                let v = y - s.anchor[1] + p[1];
                let inside = u.min(s.size - u).min(v).min(s.size - v);
                inside.clamp(0.0, 1.0)
            }
        }
    }

    fn sprite_color(&self, s: &SpriteSpec, u: f64, v: f64, c: usize) -> f64 {
        match &self.sprite {
            Some(tex) => tex.sample_bilinear(u, v, c),
            None => {
                let half = s.size / 2.0;
                let sig = s.size / 4.0;
                let d2 = (u - half) * (u - half) + (v - half) * (v - half);
                0.5 + 0.45 * math::exp(-d2 / (2.0 * sig * sig))
            }
        }
    }

    pub fn render_frame(&self, t: f64) -> Result<Image> {
        let spec = &self.spec;
        let p = spec.global_motion.position(t);
        let sp = spec.sprite.map(|s| (s, s.trajectory.position(t)));
        Image::from_fn(spec.height, spec.width, spec.channels, |y, x, c| {
            let bg = self.background.sample_bilinear(
                x as f64 + self.margin + p[0],
                y as f64 + self.margin + p[1],
                c,
            );
            match sp {
                None => bg,
                Some((s, q)) => {
                    let alpha = self.sprite_alpha(x as f64, y as f64, t);
                    if alpha == 0.0 {
                        bg
                    } else {
                        let u = x as f64 - s.anchor[0] + q[0];
                        let v = y as f64 - s.anchor[1] + q[1];
                        alpha * self.sprite_color(&s, u, v, c) + (1.0 - alpha) * bg
                    }
                }
            }
        })
    }

    /// Exact `f_{from→to}` on the grid of the frame at `to`.
    pub fn ground_truth_flow(&self, from: f64, to: f64) -> Result<FlowField> {
        let bg = self.spec.global_motion.displacement(from, to);
        let fg = self
            .spec
            .sprite
            .map(|s| s.trajectory.displacement(from, to));
        FlowField::from_fn(self.spec.height, self.spec.width, |y, x| match fg {
            Some(d) if self.sprite_alpha(x as f64, y as f64, to) >= 0.5 => d,
            _ => bg,
        })
    }

    /// On the grid of the frame at `from`: 1 where a visible background point is
    /// covered by the sprite at `to`, else 0.
    pub fn occlusion_mask(&self, from: f64, to: f64) -> Result<Image> {
        let d = self.spec.global_motion.displacement(to, from);
        Image::from_fn(self.spec.height, self.spec.width, 1, |y, x, _| {
            let (xf, yf) = (x as f64, y as f64);
            if self.sprite_alpha(xf, yf, from) >= 0.5 {
                return 0.0;
            }
            if self.sprite_alpha(xf + d[0], yf + d[1], to) >= 0.5 {
                1.0
            } else {
                0.0
            }
        })
    }

    /// The input window at `t = −1, 0, 1, 2`.
    pub fn quad(&self) -> Result<InputQuad> {
        InputQuad::new(
            self.render_frame(-1.0)?,
            self.render_frame(0.0)?,
            self.render_frame(1.0)?,
            self.render_frame(2.0)?,
        )
    }

    /// Ground-truth frames at the `n` uniform intermediate stamps.
    pub fn truth(&self, n: usize) -> Result<Vec<Image>> {
        TimeStamp::uniform(n)
            .iter()
            .map(|t| self.render_frame(t.value()))
            .collect()
    }
}

/// Frames at `times` and the ground-truth flow from `t = 0` to each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedSequence {
    pub frames: Vec<Image>,
    pub flows: Vec<FlowField>,
}

pub fn render_sequence(scene: &SceneSpec, times: &[f64]) -> Result<RenderedSequence> {
    let scene = Scene::new(scene.clone())?;
    let mut frames = Vec::with_capacity(times.len());
    let mut flows = Vec::with_capacity(times.len());
    for &t in times {
        frames.push(scene.render_frame(t)?);
        flows.push(scene.ground_truth_flow(0.0, t)?);
    }
    Ok(RenderedSequence { frames, flows })
}

/// Seeded variable-acceleration scene: a textured background following a
/// variable-acceleration trajectory, optionally with a sprite on its own one.
pub fn variable_acceleration_scene(seed: u64, size: usize, with_sprite: bool) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let global_motion = TrajectoryPreset::VariableAcceleration.sample(&mut rng, 1.0);
    let sprite = with_sprite.then(|| {
        let traj = TrajectoryPreset::VariableAcceleration.sample(&mut rng, 1.0);
        let side = libm::round(size as f64 / 4.0);
        let c = (size as f64 - side) / 2.0;
        SpriteSpec {
            shape: SpriteShape::Patch,
            size: side,
            anchor: [c, c],
            trajectory: traj,
            texture: TextureSpec {
                seed: seed.wrapping_mul(31).wrapping_add(7),
                blur: 1.0,
                contrast: 0.9,
            },
        }
    });
    SceneSpec {
        width: size,
        height: size,
        channels: 1,
        background: TextureSpec {
            seed,
            ..TextureSpec::default()
        },
        global_motion,
        sprite,
    }
}

/// Scene translating at a constant `(vx, vy)` pixels per interval.
pub fn translation_scene(seed: u64, size: usize, velocity: [f64; 2]) -> SceneSpec {
    SceneSpec {
        global_motion: TrajectorySpec::new(
            [0.0, velocity[0], 0.0, 0.0],
            [0.0, velocity[1], 0.0, 0.0],
        ),
        ..SceneSpec::static_scene(size, size, seed)
    }
}

/// Deterministic seed derivation for the `k`-th item of a seeded suite.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n` trajectories of a preset family.
pub fn sample_family(preset: TrajectoryPreset, n: usize, seed: u64) -> Vec<TrajectorySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| preset.sample(&mut rng, 1.0)).collect()
}
