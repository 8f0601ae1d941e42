//! Command-line entry points.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempyr_core::metrics::{evaluate_sequence, relaxed_warp_loss};
use tempyr_core::pyramid::{interpolate_n, IdentityFlowRefiner, IdentityFrameRefiner, MaskPrior};
use tempyr_core::solver::estimate_bundle;
use tempyr_core::{FlowSolverConfig, Image, InputQuad, MotionModelKind, TimeStamp};

use crate::bench::{bracketed, run_bench, BenchOptions};
use crate::error::{Error, Result};
use crate::flo::write_flo;
use crate::manifest::SequenceManifest;
use crate::png::{read_png, write_png};
use crate::report::{Report, ReportFormat, Row};
use crate::upconvert::{upconvert, UpconvertOptions};

#[derive(Debug, Parser)]
#[command(
    name = "tempyr",
    version,
    about = "Multi-frame video interpolation from four-frame windows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Linear,
    Quad,
    Cubic,
}

impl From<ModelArg> for MotionModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Linear => MotionModelKind::Linear,
            ModelArg::Quad => MotionModelKind::Quadratic,
            ModelArg::Cubic => MotionModelKind::Cubic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefinerArg {
    /// Occlusion-aware blend mask from forward-backward consistency.
    Consistency,
    /// Blend mask `1 − t` everywhere.
    Temporal,
}

impl From<RefinerArg> for MaskPrior {
    fn from(r: RefinerArg) -> Self {
        match r {
            RefinerArg::Consistency => MaskPrior::Consistency,
            RefinerArg::Temporal => MaskPrior::Temporal,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Motion model.
    #[arg(long, value_enum, default_value = "cubic", env = "TEMPYR_MODEL")]
    pub model: ModelArg,
    /// Flow pyramid depth.
    #[arg(long, default_value_t = 3, env = "TEMPYR_SCALES")]
    pub scales: usize,
    /// Solver sweeps per scale.
    #[arg(long, default_value_t = 100, env = "TEMPYR_ITERS")]
    pub iters: usize,
    /// Neighbourhood radius of the relaxed warping loss.
    #[arg(long = "relax-d", default_value_t = 9, env = "TEMPYR_RELAX_D")]
    pub relax_d: usize,
    #[arg(long, default_value_t = 0, env = "TEMPYR_SEED")]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "tempyr-out", env = "TEMPYR_OUT")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json", env = "TEMPYR_REPORT")]
    pub report: ReportFormat,
    /// Per-level refiner.
    #[arg(
        long,
        value_enum,
        default_value = "consistency",
        env = "TEMPYR_REFINER"
    )]
    pub refiner: RefinerArg,
}

impl RunArgs {
    pub fn solver(&self) -> FlowSolverConfig {
        FlowSolverConfig {
            num_scales: self.scales,
            iterations_per_scale: self.iters,
            ..FlowSolverConfig::default()
        }
    }

    fn config_row(&self) -> Row {
        Row::new()
            .with("model", MotionModelKind::from(self.model).name())
            .with("scales", self.scales)
            .with("iters", self.iters)
            .with("relax_d", self.relax_d)
            .with("seed", self.seed)
            .with("refiner", format!("{:?}", self.refiner).to_lowercase())
    }

    fn report_path(&self, stem: &str) -> PathBuf {
        self.out.join(format!("{stem}.{}", self.report.extension()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate intermediate frames between the middle two of four inputs.
    Interp(InterpArgs),
    /// Run a synthetic benchmark suite.
    Bench(BenchArgs),
    /// Raise the frame rate of a whole sequence.
    Upconvert(UpconvertArgs),
    /// Write the six inter-input flows as .flo files.
    Flow(FlowArgs),
    /// Compare a generated sequence with ground truth.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    /// Four frames at t = -1, 0, 1, 2.
    #[arg(
        long,
        num_args = 4,
        value_name = "PNG",
        conflicts_with = "manifest",
        env = "TEMPYR_INPUTS",
        value_delimiter = ','
    )]
    pub inputs: Option<Vec<PathBuf>>,
    /// Sequence manifest (JSON).
    #[arg(long, env = "TEMPYR_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// Process only this window of the manifest.
    #[arg(long, env = "TEMPYR_WINDOW")]
    pub window: Option<usize>,
    /// Frames to generate with --inputs (odd).
    #[arg(long, default_value_t = 7, env = "TEMPYR_FRAMES")]
    pub frames: usize,
    /// Ground-truth frames for --inputs, one per generated frame.
    #[arg(long, num_args = 1.., value_name = "PNG", env = "TEMPYR_TRUTH", value_delimiter = ',')]
    pub truth: Option<Vec<PathBuf>>,
    /// Also write the inter-input flows.
    #[arg(long, env = "TEMPYR_SAVE_FLOWS")]
    pub save_flows: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, env = "TEMPYR_SUITE")]
    pub suite: String,
    /// Items in the suite (suite default if omitted).
    #[arg(long, env = "TEMPYR_COUNT")]
    pub count: Option<usize>,
    /// Frame size of rendered scenes.
    #[arg(long, default_value_t = 64, env = "TEMPYR_SIZE")]
    pub size: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct UpconvertArgs {
    /// Sequence manifest; all its frames are used in order.
    #[arg(long, conflicts_with = "inputs", env = "TEMPYR_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// Frames in order.
    #[arg(long, num_args = 2.., value_name = "PNG", env = "TEMPYR_INPUTS", value_delimiter = ',')]
    pub inputs: Option<Vec<PathBuf>>,
    #[arg(long, default_value_t = 8, env = "TEMPYR_FACTOR")]
    pub factor: u32,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Four frames at t = -1, 0, 1, 2.
    #[arg(
        long,
        num_args = 4,
        value_name = "PNG",
        required = true,
        env = "TEMPYR_INPUTS",
        value_delimiter = ','
    )]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long, num_args = 1.., value_name = "PNG", required = true, env = "TEMPYR_GENERATED", value_delimiter = ',')]
    pub generated: Vec<PathBuf>,
    #[arg(long, num_args = 1.., value_name = "PNG", required = true, env = "TEMPYR_TRUTH", value_delimiter = ',')]
    pub truth: Vec<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Interp(a) => interp(&a),
        Command::Bench(a) => bench(&a),
        Command::Upconvert(a) => upconvert_cmd(&a),
        Command::Flow(a) => flow(&a),
        Command::Metrics(a) => metrics(&a),
    }
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Image>> {
    paths.iter().map(|p| read_png(p)).collect()
}

fn read_quad(paths: &[PathBuf]) -> Result<InputQuad> {
    let mut f = read_all(paths)?.into_iter();
    let mut next = || f.next().expect("four inputs");
    Ok(InputQuad::new(next(), next(), next(), next())?)
}

fn stamp_name(t: &TimeStamp) -> String {
    format!("frame_{}-{}.png", t.num(), t.den())
}

/// Interpolates one window, writes its frames (and flows) under `dir` and adds
/// one row per frame to `report`. Returns written paths.
fn interp_window(
    quad: &InputQuad,
    n: usize,
    truth: &[(usize, Image)],
    dir: &Path,
    window: Option<usize>,
    args: &InterpArgs,
    report: &mut Report,
) -> Result<Vec<PathBuf>> {
    let run = &args.run;
    let r = interpolate_n(
        quad,
        n,
        run.model.into(),
        &run.solver(),
        &mut IdentityFlowRefiner {
            prior: run.refiner.into(),
        },
        &mut IdentityFrameRefiner,
    )?;
    let mut written = Vec::new();
    for (t, frame) in r.stamps.iter().zip(&r.frames) {
        let p = dir.join(stamp_name(t));
        write_png(&p, frame)?;
        written.push(p);
    }
    if args.save_flows {
        for (name, f) in r.bundle.named() {
            let p = dir.join("flows").join(format!("{name}.flo"));
            write_flo(&p, f)?;
            written.push(p);
        }
    }
    let mut scored = Vec::new();
    for (k, (t, frame)) in r.stamps.iter().zip(&r.frames).enumerate() {
        let mut row = Row::new();
        if let Some(w) = window {
            row.push("window", w);
        }
        row.push("stamp", t.to_string());
        row.push("file", stamp_name(t));
        if let Some((_, gt)) = truth.iter().find(|(s, _)| *s == k + 1) {
            let m = evaluate_sequence(std::slice::from_ref(frame), std::slice::from_ref(gt))?;
            row.push("psnr", m.psnr[0]);
            row.push("ssim", m.ssim[0]);
            row.push("ie", m.ie[0]);
            row.push(
                "relaxed_loss",
                relaxed_warp_loss(frame, gt, run.relax_d)?.mean,
            );
            scored.push((frame.clone(), gt.clone()));
        }
        report.rows.push(row);
    }
    if !scored.is_empty() {
        let (g, t): (Vec<Image>, Vec<Image>) = scored.into_iter().unzip();
        let m = evaluate_sequence(&g, &t)?;
        let prefix = window.map(|w| format!("window_{w}_")).unwrap_or_default();
        report
            .summary
            .push(&format!("{prefix}mean_psnr"), m.mean_psnr);
        report
            .summary
            .push(&format!("{prefix}mean_ssim"), m.mean_ssim);
        report.summary.push(&format!("{prefix}mean_ie"), m.mean_ie);
        if g.len() == n {
            let tcc = tempyr_core::metrics::tcc(&bracketed(quad, &g), &bracketed(quad, &t))?;
            report.summary.push(&format!("{prefix}tcc"), tcc);
        }
    }
    Ok(written)
}

fn interp(args: &InterpArgs) -> Result<Vec<PathBuf>> {
    let run = &args.run;
    let mut report = Report::new("interp", run.config_row());
    let mut written = Vec::new();
    match (&args.inputs, &args.manifest) {
        (Some(inputs), None) => {
            let quad = read_quad(inputs)?;
            let truth = match &args.truth {
                Some(paths) => {
                    if paths.len() != args.frames {
                        return Err(Error::Usage(format!(
                            "{} ground-truth frames for {} generated frames",
                            paths.len(),
                            args.frames
                        )));
                    }
                    read_all(paths)?
                        .into_iter()
                        .enumerate()
                        .map(|(k, f)| (k + 1, f))
                        .collect()
                }
                None => Vec::new(),
            };
            written.extend(interp_window(
                &quad,
                args.frames,
                &truth,
                &run.out,
                None,
                args,
                &mut report,
            )?);
        }
        (None, Some(path)) => {
            let m = SequenceManifest::load(path)?;
            let windows: Vec<usize> = match args.window {
                Some(w) => vec![w],
                None => (0..m.num_windows()).collect(),
            };
            if windows.is_empty() {
                return Err(Error::Manifest(format!(
                    "{} frames are fewer than one window of {}",
                    m.frames.len(),
                    m.sampling.window
                )));
            }
            let n = m.sampling.num_intermediate();
            for w in windows {
                let win = m.window(w)?;
                let dir = run.out.join(format!("window_{w:03}"));
                written.extend(interp_window(
                    &win.quad,
                    n,
                    &win.truth,
                    &dir,
                    Some(w),
                    args,
                    &mut report,
                )?);
            }
        }
        _ => {
            return Err(Error::Usage(
                "give either --inputs (four frames) or --manifest".into(),
            ))
        }
    }
    let p = run.report_path("report");
    report.write(&p, run.report)?;
    written.push(p);
    Ok(written)
}

fn bench(args: &BenchArgs) -> Result<Vec<PathBuf>> {
    let run = &args.run;
    let opts = BenchOptions {
        seed: run.seed,
        count: args.count,
        size: args.size,
        solver: run.solver(),
        relax_d: run.relax_d,
        mask: run.refiner.into(),
    };
    let report = run_bench(&args.suite, &opts)?;
    let p = run.report_path(&format!("bench_{}", args.suite));
    report.write(&p, run.report)?;
    Ok(vec![p])
}

fn upconvert_cmd(args: &UpconvertArgs) -> Result<Vec<PathBuf>> {
    let run = &args.run;
    let paths = match (&args.manifest, &args.inputs) {
        (Some(m), None) => SequenceManifest::load(m)?.paths(),
        (None, Some(p)) => p.clone(),
        _ => return Err(Error::Usage("give either --inputs or --manifest".into())),
    };
    crate::upconvert::passes_for(args.factor)?;
    let frames = read_all(&paths)?;
    let opts = UpconvertOptions {
        kind: run.model.into(),
        solver: run.solver(),
        mask: run.refiner.into(),
    };
    let out = upconvert(&frames, args.factor, &opts)?;
    let mut report = Report::new(
        "upconvert",
        run.config_row().with("factor", args.factor as usize),
    );
    let mut written = Vec::new();
    for f in &out {
        let p = run.out.join(f.file_name());
        write_png(&p, &f.image)?;
        report.rows.push(
            Row::new()
                .with("file", f.file_name())
                .with("gap", f.gap)
                .with("stamp", format!("{}/{}", f.num, f.den))
                .with("generated", f.num != 0),
        );
        written.push(p);
    }
    report.summary.push("frames", out.len());
    let p = run.report_path("report");
    report.write(&p, run.report)?;
    written.push(p);
    Ok(written)
}

fn flow(args: &FlowArgs) -> Result<Vec<PathBuf>> {
    let quad = read_quad(&args.inputs)?;
    let bundle = estimate_bundle(&quad, &args.run.solver())?;
    let mut written = Vec::new();
    for (name, f) in bundle.named() {
        let p = args.run.out.join(format!("{name}.flo"));
        write_flo(&p, f)?;
        written.push(p);
    }
    Ok(written)
}

fn metrics(args: &MetricsArgs) -> Result<Vec<PathBuf>> {
    let run = &args.run;
    if args.generated.len() != args.truth.len() {
        return Err(Error::Usage(format!(
            "{} generated frames but {} ground-truth frames",
            args.generated.len(),
            args.truth.len()
        )));
    }
    let g = read_all(&args.generated)?;
    let t = read_all(&args.truth)?;
    let m = evaluate_sequence(&g, &t)?;
    let mut report = Report::new("metrics", run.config_row());
    for (k, path) in args.generated.iter().enumerate() {
        report.rows.push(
            Row::new()
                .with("frame", k)
                .with("file", path.display().to_string())
                .with("psnr", m.psnr[k])
                .with("ssim", m.ssim[k])
                .with("ie", m.ie[k])
                .with(
                    "relaxed_loss",
                    relaxed_warp_loss(&g[k], &t[k], run.relax_d)?.mean,
                ),
        );
    }
    report.summary.push("mean_psnr", m.mean_psnr);
    report.summary.push("mean_ssim", m.mean_ssim);
    report.summary.push("mean_ie", m.mean_ie);
    if let Some(tcc) = m.tcc {
        report.summary.push("tcc", tcc);
    }
    let p = run.report_path("metrics");
    report.write(&p, run.report)?;
    Ok(vec![p])
}
