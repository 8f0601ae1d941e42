//! Seeded synthetic benchmark suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempyr_core::metrics::{endpoint_error, evaluate_sequence, relaxed_warp_loss, tcc};
use tempyr_core::pyramid::{
    interpolate_independent, interpolate_with_bundle, plan_pyramid, IdentityFlowRefiner,
    IdentityFrameRefiner, MaskPrior,
};
use tempyr_core::solver::{estimate_bundle, estimate_pair_flow};
use tempyr_core::synth::{
    derive_seed, relaxation_experiment, sample_family, toy_model_comparison, translation_scene,
    variable_acceleration_scene, Scene, TrajectoryPreset, TrajectorySpec,
};
use tempyr_core::{FlowSolverConfig, Image, InputQuad, MotionModelKind};

use crate::error::{Error, Result};
use crate::report::{Report, Row};

pub const SUITES: [&str; 3] = ["toy-fig3", "variable-accel-scenes", "translation"];

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub seed: u64,
    /// Items in the suite; each suite has its own default.
    pub count: Option<usize>,
    pub size: usize,
    pub solver: FlowSolverConfig,
    pub relax_d: usize,
    pub mask: MaskPrior,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            count: None,
            size: 64,
            solver: FlowSolverConfig::default(),
            relax_d: tempyr_core::metrics::DEFAULT_RELAX_RADIUS,
            mask: MaskPrior::default(),
        }
    }
}

pub fn run_bench(suite: &str, opts: &BenchOptions) -> Result<Report> {
    let config = Row::new()
        .with("suite", suite)
        .with("seed", opts.seed)
        .with("size", opts.size)
        .with("scales", opts.solver.num_scales)
        .with("iters", opts.solver.iterations_per_scale)
        .with("relax_d", opts.relax_d);
    let mut report = Report::new("bench", config);
    match suite {
        "toy-fig3" => toy(opts, &mut report),
        "variable-accel-scenes" => scenes(opts, &mut report)?,
        "translation" => translations(opts, &mut report)?,
        _ => return Err(Error::UnknownSuite(suite.into())),
    }
    Ok(report)
}

/// `I_0`, the generated frames, `I_1`.
pub fn bracketed(quad: &InputQuad, frames: &[Image]) -> Vec<Image> {
    let mut v = Vec::with_capacity(frames.len() + 2);
    v.push(quad.first().clone());
    v.extend_from_slice(frames);
    v.push(quad.second().clone());
    v
}

fn max2(v: [f64; 2]) -> f64 {
    v[0].max(v[1])
}

fn toy(opts: &BenchOptions, report: &mut Report) {
    let n = opts.count.unwrap_or(20);
    let mut times: Vec<f64> = (1..8).map(|i| i as f64 / 8.0).collect();
    times.extend([-0.5, 1.5]);
    let mut max_res = [[0.0f64; 3]; 3];
    for (p, preset) in TrajectoryPreset::ALL.iter().enumerate() {
        let mut specs = vec![preset.canonical()];
        specs.extend(sample_family(*preset, n, derive_seed(opts.seed, p as u64)));
        for (j, spec) in specs.iter().enumerate() {
            for e in toy_model_comparison(spec, &times) {
                let mut row = Row::new()
                    .with("preset", preset.name())
                    .with("trajectory", j)
                    .with("t", e.t)
                    .with("extrapolated", e.extrapolated);
                for (m, kind) in MotionModelKind::ALL.iter().enumerate() {
                    let r = max2(e.get(*kind));
                    row.push(kind.name(), r);
                    max_res[p][m] = max_res[p][m].max(r);
                }
                report.rows.push(row);
            }
        }
    }
    for (p, preset) in TrajectoryPreset::ALL.iter().enumerate() {
        for (m, kind) in MotionModelKind::ALL.iter().enumerate() {
            report.summary.push(
                &format!("max_{}_{}", kind.name(), preset.name()),
                max_res[p][m],
            );
        }
    }
    // Fourth-order motion, where moving the sample points can help.
    let quartic =
        TrajectorySpec::new([0.0, 0.5, 0.3, 0.4], [0.0, 0.2, -0.1, -0.2]).with_quartic([0.3, -0.2]);
    for kind in MotionModelKind::ALL {
        let r = relaxation_experiment(&quartic, kind, 0.5, 500, opts.seed);
        report.summary.push(
            &format!("relaxation_{}_exact_mse", kind.name()),
            r.unperturbed_mse,
        );
        report.summary.push(
            &format!("relaxation_{}_relaxed_mse", kind.name()),
            r.perturbed_mse,
        );
    }
}

fn scenes(opts: &BenchOptions, report: &mut Report) -> Result<()> {
    let n = opts.count.unwrap_or(20);
    let plan = plan_pyramid(7)?;
    let mut sums = [[0.0f64; 5]; 3];
    let mut baseline_tcc = 0.0;
    for k in 0..n {
        let seed = derive_seed(opts.seed, k as u64);
        let scene = Scene::new(variable_acceleration_scene(seed, opts.size, false))?;
        let quad = scene.quad()?;
        let truth = scene.truth(7)?;
        let bundle = estimate_bundle(&quad, &opts.solver)?;
        let gt = bracketed(&quad, &truth);
        for (m, kind) in MotionModelKind::ALL.iter().enumerate() {
            let r = interpolate_with_bundle(
                &quad,
                bundle.clone(),
                &plan,
                *kind,
                &mut IdentityFlowRefiner { prior: opts.mask },
                &mut IdentityFrameRefiner,
            )?;
            let met = evaluate_sequence(&r.frames, &truth)?;
            let t = tcc(&bracketed(&quad, &r.frames), &gt)?;
            let relaxed = r
                .frames
                .iter()
                .zip(&truth)
                .map(|(a, b)| Ok(relaxed_warp_loss(a, b, opts.relax_d)?.mean))
                .sum::<Result<f64>>()?
                / truth.len() as f64;
            let vals = [met.mean_psnr, met.mean_ssim, met.mean_ie, t, relaxed];
            for (s, v) in sums[m].iter_mut().zip(vals) {
                *s += v / n as f64;
            }
            report.rows.push(
                Row::new()
                    .with("scene", k)
                    .with("scene_seed", seed)
                    .with("model", kind.name())
                    .with("psnr", vals[0])
                    .with("ssim", vals[1])
                    .with("ie", vals[2])
                    .with("tcc", vals[3])
                    .with("relaxed_loss", vals[4]),
            );
        }
        let base = interpolate_independent(&quad, 7, &opts.solver)?;
        baseline_tcc += tcc(&bracketed(&quad, &base), &gt)? / n as f64;
    }
    for (m, kind) in MotionModelKind::ALL.iter().enumerate() {
        for (j, name) in ["psnr", "ssim", "ie", "tcc", "relaxed_loss"]
            .iter()
            .enumerate()
        {
            report
                .summary
                .push(&format!("mean_{name}_{}", kind.name()), sums[m][j]);
        }
    }
    report
        .summary
        .push("mean_tcc_independent_baseline", baseline_tcc);
    report.summary.push(
        "psnr_ordering_holds",
        sums[2][0] >= sums[1][0] && sums[1][0] >= sums[0][0],
    );
    Ok(())
}

fn translations(opts: &BenchOptions, report: &mut Report) -> Result<()> {
    let n = opts.count.unwrap_or(8);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut total = 0.0;
    for k in 0..n {
        let (r, a) = (
            rng.random_range(0.0..4.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let v = [r * a.cos(), r * a.sin()];
        let scene = Scene::new(translation_scene(
            derive_seed(opts.seed, k as u64),
            opts.size,
            v,
        ))?;
        let f = estimate_pair_flow(
            &scene.render_frame(0.0)?,
            &scene.render_frame(1.0)?,
            None,
            &opts.solver,
        )?;
        let epe = endpoint_error(&f, &scene.ground_truth_flow(0.0, 1.0)?)?;
        total += epe / n as f64;
        report.rows.push(
            Row::new()
                .with("case", k)
                .with("vx", v[0])
                .with("vy", v[1])
                .with("epe", epe),
        );
    }
    report.summary.push("mean_epe", total);
    Ok(())
}
