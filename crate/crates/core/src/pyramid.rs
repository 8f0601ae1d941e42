//! Temporal pyramids and the end-to-end interpolation pipeline.
//!
//! Timestamp `i` of `n` has depth `min(i, n + 1 − i)`: the stamps next to the
//! inputs are processed by a single level and the middle one by all of them.
//!
//! * Flow refinement runs levels `1..=L`. Level `k` refines every stamp whose depth
//!   is at least `k`; stamps of depth `k` are final afterwards. After each level
//!   `I_0` and `I_1` are warped with the refined flows and handed to the next level
//!   as guidance.
//! * Post-processing runs levels `L..=1`. The synthesized frame of a stamp enters
//!   at the level equal to its depth, and every level also sees the warped inputs
//!   of its stamps and the frames refined by the level before it.
//!
//! In both pyramids a stamp is touched by exactly `depth(i)` refiner calls.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::Image;
use crate::motion::{self, MotionModelKind};
use crate::solver::{self, FlowBundle, FlowSolverConfig};
use crate::types::{BlendMask, InputQuad, TimeStamp};
use crate::warp;

/// Level assignment of `n` intermediate timestamps (`n` odd).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PyramidPlan {
    num_frames: usize,
    levels: Vec<Vec<usize>>,
}

/// Builds the plan for `n_frames` evenly spaced stamps.
pub fn plan_pyramid(n_frames: usize) -> Result<PyramidPlan> {
    if n_frames == 0 || n_frames.is_multiple_of(2) {
        return Err(Error::InvalidCount(n_frames));
    }
    let num_levels = n_frames.div_ceil(2);
    let mut levels = alloc::vec![Vec::new(); num_levels];
    for i in 1..=n_frames {
        levels[depth_of(i, n_frames) - 1].push(i);
    }
    Ok(PyramidPlan {
        num_frames: n_frames,
        levels,
    })
}

fn depth_of(i: usize, n: usize) -> usize {
    i.min(n + 1 - i)
}

impl PyramidPlan {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Stamp indices (1-based) assigned to `level` (1-based).
    pub fn level_stamps(&self, level: usize) -> &[usize] {
        &self.levels[level - 1]
    }

    pub fn depth(&self, i: usize) -> usize {
        depth_of(i, self.num_frames)
    }

    /// Stamps processed at `level`, i.e. those with depth ≥ `level`, ascending.
    pub fn active_at(&self, level: usize) -> Vec<usize> {
        (1..=self.num_frames)
            .filter(|&i| self.depth(i) >= level)
            .collect()
    }

    pub fn timestamps(&self) -> Vec<TimeStamp> {
        TimeStamp::uniform(self.num_frames)
    }
}

/// `I_0` and `I_1` warped toward one intermediate timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedPair {
    pub from_0: Image,
    pub from_1: Image,
}

/// Warped frames produced by one flow-refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGuidance {
    pub level: usize,
    pub stamps: Vec<usize>,
    pub warped: Vec<WarpedPair>,
}

/// What a flow refiner sees at one level. `stamps`, `times` and `flows` are aligned.
pub struct FlowLevelInput<'a> {
    pub level: usize,
    pub stamps: &'a [usize],
    pub times: &'a [TimeStamp],
    /// Predicted flows at level 1, the previous level's refined flows afterwards.
    pub flows: &'a [(FlowField, FlowField)],
    /// Warped frames of the previous level; `None` at level 1.
    pub guidance: Option<&'a LevelGuidance>,
    pub i0: &'a Image,
    pub i1: &'a Image,
    pub bundle: &'a FlowBundle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowLevelOutput {
    pub flows: Vec<(FlowField, FlowField)>,
    pub masks: Vec<BlendMask>,
}

/// One level of the flow-refinement pyramid.
pub trait FlowRefiner {
    fn refine(&mut self, input: &FlowLevelInput<'_>) -> Result<FlowLevelOutput>;
}

/// How [`IdentityFlowRefiner`] builds its blend masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskPrior {
    /// `1 − t` everywhere.
    Temporal,
    /// [`warp::default_blend_mask`].
    #[default]
    Consistency,
}

/// Passes flows through unchanged and attaches blend masks.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFlowRefiner {
    pub prior: MaskPrior,
}

impl IdentityFlowRefiner {
    pub fn temporal() -> Self {
        Self {
            prior: MaskPrior::Temporal,
        }
    }
}

impl FlowRefiner for IdentityFlowRefiner {
    fn refine(&mut self, input: &FlowLevelInput<'_>) -> Result<FlowLevelOutput> {
        let (h, w) = (input.i0.height(), input.i0.width());
        let masks = input
            .flows
            .iter()
            .zip(input.times)
            .map(|((f0t, f1t), &t)| match self.prior {
                MaskPrior::Temporal => BlendMask::constant(h, w, 1.0 - t.value()),
                MaskPrior::Consistency => warp::default_blend_mask(
                    f0t,
                    f1t,
                    t,
                    &input.bundle.f_0_to_1,
                    &input.bundle.f_1_to_0,
                ),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FlowLevelOutput {
            flows: input.flows.to_vec(),
            masks,
        })
    }
}

/// What a frame refiner sees at one post-processing level.
pub struct FrameLevelInput<'a> {
    pub level: usize,
    /// Every stamp processed at this level, ascending; the output follows this order.
    pub active: &'a [usize],
    /// Stamps whose synthesized frame enters here, with those frames.
    pub entering: &'a [usize],
    pub entering_frames: &'a [Image],
    /// Warped inputs aligned with `active`.
    pub warped: &'a [WarpedPair],
    /// Frames refined by the previous level, with their stamps.
    pub previous: &'a [usize],
    pub previous_frames: &'a [Image],
}

/// One level of the post-processing pyramid.
pub trait FrameRefiner {
    fn refine(&mut self, input: &FrameLevelInput<'_>) -> Result<Vec<Image>>;
}

/// Returns each active frame unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFrameRefiner;

impl FrameRefiner for IdentityFrameRefiner {
    fn refine(&mut self, input: &FrameLevelInput<'_>) -> Result<Vec<Image>> {
        input
            .active
            .iter()
            .map(|s| {
                if let Some(k) = input.previous.iter().position(|p| p == s) {
                    Ok(input.previous_frames[k].clone())
                } else if let Some(k) = input.entering.iter().position(|p| p == s) {
                    Ok(input.entering_frames[k].clone())
                } else {
                    Err(Error::Contract(format!(
                        "stamp {s} has no frame at level {}",
                        input.level
                    )))
                }
            })
            .collect()
    }
}

/// Output of [`refine_flows_pyramidal`], indexed by stamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidFlows {
    pub flows: Vec<(FlowField, FlowField)>,
    pub masks: Vec<BlendMask>,
    pub warped: Vec<WarpedPair>,
}

fn check_count(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Contract(format!(
            "{what}: {got} items, expected {want}"
        )));
    }
    Ok(())
}

/// Runs the flow-refinement pyramid over `predicted` (one pair per stamp).
pub fn refine_flows_pyramidal(
    predicted: &[(FlowField, FlowField)],
    i0: &Image,
    i1: &Image,
    bundle: &FlowBundle,
    refiner: &mut dyn FlowRefiner,
    plan: &PyramidPlan,
) -> Result<PyramidFlows> {
    let n = plan.num_frames();
    if predicted.len() != n {
        return Err(Error::LengthMismatch(predicted.len(), n));
    }
    i0.same_dims(i1)?;
    let (h, w) = (i0.height(), i0.width());
    for (a, b) in predicted {
        a.check_dims(h, w)?;
        b.check_dims(h, w)?;
    }
    let times = plan.timestamps();

    let mut current: Vec<Option<(FlowField, FlowField)>> =
        predicted.iter().cloned().map(Some).collect();
    let mut final_flows: Vec<Option<(FlowField, FlowField)>> = alloc::vec![None; n];
    let mut final_masks: Vec<Option<BlendMask>> = alloc::vec![None; n];
    let mut final_warped: Vec<Option<WarpedPair>> = alloc::vec![None; n];
    let mut guidance: Option<LevelGuidance> = None;

    for level in 1..=plan.num_levels() {
        let active = plan.active_at(level);
        let level_times: Vec<TimeStamp> = active.iter().map(|&i| times[i - 1]).collect();
        let flows: Vec<(FlowField, FlowField)> = active
            .iter()
            .map(|&i| current[i - 1].clone().expect("active stamp has flows"))
            .collect();
        let out = refiner.refine(&FlowLevelInput {
            level,
            stamps: &active,
            times: &level_times,
            flows: &flows,
            guidance: guidance.as_ref(),
            i0,
            i1,
            bundle,
        })?;
        check_count("refined flows", out.flows.len(), active.len())?;
        check_count("blend masks", out.masks.len(), active.len())?;

        let mut warped = Vec::with_capacity(active.len());
        for (k, &i) in active.iter().enumerate() {
            let (f0t, f1t) = &out.flows[k];
            if f0t.dims() != (h, w) || f1t.dims() != (h, w) {
                return Err(Error::Contract(format!(
                    "refined flow of stamp {i} has wrong size"
                )));
            }
            if out.masks[k].dims() != (h, w) {
                return Err(Error::Contract(format!("mask of stamp {i} has wrong size")));
            }
            let pair = WarpedPair {
                from_0: warp::warp_bilinear(i0, f0t)?,
                from_1: warp::warp_bilinear(i1, f1t)?,
            };
            if plan.depth(i) == level {
                final_flows[i - 1] = Some(out.flows[k].clone());
                final_masks[i - 1] = Some(out.masks[k].clone());
                final_warped[i - 1] = Some(pair.clone());
            }
            current[i - 1] = Some(out.flows[k].clone());
            warped.push(pair);
        }
        guidance = Some(LevelGuidance {
            level,
            stamps: active,
            warped,
        });
    }

    Ok(PyramidFlows {
        flows: final_flows
            .into_iter()
            .map(|f| f.expect("every stamp exits"))
            .collect(),
        masks: final_masks
            .into_iter()
            .map(|m| m.expect("every stamp exits"))
            .collect(),
        warped: final_warped
            .into_iter()
            .map(|p| p.expect("every stamp exits"))
            .collect(),
    })
}

/// Runs the post-processing pyramid. `raw` and `warped` are indexed by stamp order.
pub fn postprocess_pyramidal(
    raw: &[Image],
    warped: &[WarpedPair],
    refiner: &mut dyn FrameRefiner,
    plan: &PyramidPlan,
) -> Result<Vec<Image>> {
    let n = plan.num_frames();
    if raw.len() != n {
        return Err(Error::LengthMismatch(raw.len(), n));
    }
    if warped.len() != n {
        return Err(Error::LengthMismatch(warped.len(), n));
    }
    let dims = raw[0].dims();
    let mut previous: Vec<usize> = Vec::new();
    let mut previous_frames: Vec<Image> = Vec::new();
    for level in (1..=plan.num_levels()).rev() {
        let active = plan.active_at(level);
        let entering = plan.level_stamps(level).to_vec();
        let entering_frames: Vec<Image> = entering.iter().map(|&i| raw[i - 1].clone()).collect();
        let level_warped: Vec<WarpedPair> = active.iter().map(|&i| warped[i - 1].clone()).collect();
        let out = refiner.refine(&FrameLevelInput {
            level,
            active: &active,
            entering: &entering,
            entering_frames: &entering_frames,
            warped: &level_warped,
            previous: &previous,
            previous_frames: &previous_frames,
        })?;
        check_count("refined frames", out.len(), active.len())?;
        if let Some(bad) = out.iter().position(|f| f.dims() != dims) {
            return Err(Error::Contract(format!(
                "refined frame of stamp {} has wrong size",
                active[bad]
            )));
        }
        previous = active;
        previous_frames = out;
    }
    Ok(previous_frames)
}

/// Everything produced for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationResult {
    pub stamps: Vec<TimeStamp>,
    /// Post-processed frames.
    pub frames: Vec<Image>,
    /// Frames straight out of the blend, before post-processing.
    pub raw_frames: Vec<Image>,
    pub predicted_flows: Vec<(FlowField, FlowField)>,
    pub refined_flows: Vec<(FlowField, FlowField)>,
    pub masks: Vec<BlendMask>,
    pub bundle: FlowBundle,
}

/// Seven frames at `t = i/8` between the middle frames of `quad`.
pub fn interpolate(
    quad: &InputQuad,
    kind: MotionModelKind,
    cfg: &FlowSolverConfig,
    flow_refiner: &mut dyn FlowRefiner,
    frame_refiner: &mut dyn FrameRefiner,
) -> Result<InterpolationResult> {
    interpolate_n(quad, 7, kind, cfg, flow_refiner, frame_refiner)
}

/// `n` frames at `t = i/(n+1)`; `n` must be odd.
pub fn interpolate_n(
    quad: &InputQuad,
    n: usize,
    kind: MotionModelKind,
    cfg: &FlowSolverConfig,
    flow_refiner: &mut dyn FlowRefiner,
    frame_refiner: &mut dyn FrameRefiner,
) -> Result<InterpolationResult> {
    let plan = plan_pyramid(n)?;
    let bundle = solver::estimate_bundle(quad, cfg)?;
    interpolate_with_bundle(quad, bundle, &plan, kind, flow_refiner, frame_refiner)
}

/// Pipeline after flow estimation, for callers that already hold the bundle.
pub fn interpolate_with_bundle(
    quad: &InputQuad,
    bundle: FlowBundle,
    plan: &PyramidPlan,
    kind: MotionModelKind,
    flow_refiner: &mut dyn FlowRefiner,
    frame_refiner: &mut dyn FrameRefiner,
) -> Result<InterpolationResult> {
    bundle.validate()?;
    let (h, w, _) = quad.dims();
    bundle.f_0_to_1.check_dims(h, w)?;
    let stamps = plan.timestamps();
    let predicted = motion::predict_all(&bundle, &stamps, kind)?;
    let (i0, i1) = (quad.first(), quad.second());
    let refined = refine_flows_pyramidal(&predicted, i0, i1, &bundle, flow_refiner, plan)?;
    let raw_frames = refined
        .warped
        .iter()
        .zip(&refined.masks)
        .map(|(p, m)| Ok(warp::blend(p.from_0.clone(), p.from_1.clone(), m)?.frame))
        .collect::<Result<Vec<_>>>()?;
    let frames = postprocess_pyramidal(&raw_frames, &refined.warped, frame_refiner, plan)?;
    Ok(InterpolationResult {
        stamps,
        frames,
        raw_frames,
        predicted_flows: predicted,
        refined_flows: refined.flows,
        masks: refined.masks,
        bundle,
    })
}

/// Baseline without the pyramid or the neighbouring inputs: each stamp is
/// synthesized on its own from flows estimated directly between `I_0` and `I_1`,
/// scaled linearly in time.
pub fn interpolate_independent(
    quad: &InputQuad,
    n: usize,
    cfg: &FlowSolverConfig,
) -> Result<Vec<Image>> {
    let (i0, i1) = (quad.first(), quad.second());
    let f01 = solver::estimate_pair_flow(i0, i1, None, cfg)?;
    let f10 = solver::estimate_pair_flow(i1, i0, None, cfg)?;
    TimeStamp::uniform(n)
        .into_iter()
        .map(|t| {
            let f0t = f01.scale(t.value());
            let f1t = f10.scale(t.mirrored().value());
            let mask = warp::default_blend_mask(&f0t, &f1t, t, &f01, &f10)?;
            Ok(warp::synthesize(i0, i1, &f0t, &f1t, &mask)?.frame)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans() {
        let p = plan_pyramid(7).unwrap();
        assert_eq!(p.num_levels(), 4);
        assert_eq!(p.level_stamps(1), &[1, 7]);
        assert_eq!(p.level_stamps(2), &[2, 6]);
        assert_eq!(p.level_stamps(3), &[3, 5]);
        assert_eq!(p.level_stamps(4), &[4]);
        let p = plan_pyramid(1).unwrap();
        assert_eq!(p.num_levels(), 1);
        assert_eq!(p.level_stamps(1), &[1]);
        let p = plan_pyramid(3).unwrap();
        assert_eq!(p.level_stamps(1), &[1, 3]);
        assert_eq!(p.level_stamps(2), &[2]);
        assert!(matches!(plan_pyramid(0), Err(Error::InvalidCount(0))));
        assert!(matches!(plan_pyramid(8), Err(Error::InvalidCount(8))));
    }

    #[test]
    fn every_stamp_in_exactly_one_level() {
        for n in (1..40).step_by(2) {
            let p = plan_pyramid(n).unwrap();
            let mut seen = alloc::vec![0; n + 1];
            for l in 1..=p.num_levels() {
                for &i in p.level_stamps(l) {
                    seen[i] += 1;
                    assert_eq!(p.depth(i), l);
                    assert_eq!(p.depth(i), p.depth(n + 1 - i));
                }
            }
            assert!(seen[1..].iter().all(|&c| c == 1));
        }
    }
}
