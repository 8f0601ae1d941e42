//! Frame-rate up-conversion over whole sequences.

use tempyr_core::pyramid::{interpolate_n, IdentityFlowRefiner, IdentityFrameRefiner, MaskPrior};
use tempyr_core::{FlowSolverConfig, Image, InputQuad, MotionModelKind};

use crate::error::{Error, Result};

/// A frame of the up-converted sequence at `gap + num/den` input intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedFrame {
    pub gap: usize,
    pub num: u32,
    pub den: u32,
    pub image: Image,
}

impl TimedFrame {
    pub fn file_name(&self) -> String {
        format!("frame_{:05}_{}-{}.png", self.gap, self.num, self.den)
    }
}

/// Number of 8× passes needed for `factor`, or 0 for a single pass of
/// `factor − 1` frames.
pub fn passes_for(factor: u32) -> Result<u32> {
    if factor < 2 || !factor.is_power_of_two() {
        return Err(Error::UnsupportedFactor(factor));
    }
    if factor <= 8 {
        return Ok(0);
    }
    let mut den = 1u64;
    let mut passes = 0;
    while den < factor as u64 {
        den *= 8;
        passes += 1;
    }
    Ok(passes)
}

#[derive(Debug, Clone)]
pub struct UpconvertOptions {
    pub kind: MotionModelKind,
    pub solver: FlowSolverConfig,
    pub mask: MaskPrior,
}

/// Inserts `n` frames into every gap. Windows at the ends repeat the boundary frame.
fn pass(seq: &[Image], n: usize, opts: &UpconvertOptions) -> Result<Vec<Image>> {
    let last = seq.len() - 1;
    let mut out = Vec::with_capacity(last * (n + 1) + 1);
    for g in 0..last {
        let quad = InputQuad::new(
            seq[g.saturating_sub(1)].clone(),
            seq[g].clone(),
            seq[g + 1].clone(),
            seq[(g + 2).min(last)].clone(),
        )?;
        let r = interpolate_n(
            &quad,
            n,
            opts.kind,
            &opts.solver,
            &mut IdentityFlowRefiner { prior: opts.mask },
            &mut IdentityFrameRefiner,
        )?;
        out.push(seq[g].clone());
        out.extend(r.frames);
    }
    out.push(seq[last].clone());
    Ok(out)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Multiplies the frame rate of `frames` by `factor`. Factors above 8 run
/// repeated 8× passes over the generated frames and keep every k-th result.
pub fn upconvert(
    frames: &[Image],
    factor: u32,
    opts: &UpconvertOptions,
) -> Result<Vec<TimedFrame>> {
    let passes = passes_for(factor)?;
    if frames.len() < 2 {
        return Err(Error::Usage(
            "up-conversion needs at least two frames".into(),
        ));
    }
    let (dense, den) = if passes == 0 {
        (pass(frames, factor as usize - 1, opts)?, factor)
    } else {
        let mut seq = frames.to_vec();
        let mut den = 1u32;
        for _ in 0..passes {
            seq = pass(&seq, 7, opts)?;
            den *= 8;
        }
        (seq, den)
    };
    let keep = (den / factor) as usize;
    Ok(dense
        .into_iter()
        .step_by(keep)
        .enumerate()
        .map(|(j, image)| {
            let gap = j / factor as usize;
            let num = (j % factor as usize) as u32;
            let g = gcd(num, factor).max(1);
            let (num, den) = if num == 0 {
                (0, 1)
            } else {
                (num / g, factor / g)
            };
            TimedFrame {
                gap,
                num,
                den,
                image,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors() {
        assert_eq!(passes_for(2).unwrap(), 0);
        assert_eq!(passes_for(8).unwrap(), 0);
        assert_eq!(passes_for(16).unwrap(), 2);
        assert_eq!(passes_for(64).unwrap(), 2);
        assert_eq!(passes_for(128).unwrap(), 3);
        for f in [0, 1, 3, 6, 24] {
            assert!(matches!(passes_for(f), Err(Error::UnsupportedFactor(_))));
        }
    }

    fn opts() -> UpconvertOptions {
        UpconvertOptions {
            kind: MotionModelKind::Cubic,
            solver: FlowSolverConfig::default(),
            mask: MaskPrior::default(),
        }
    }

    #[test]
    fn counts_and_stamps() {
        let frames: Vec<Image> = (0..3)
            .map(|k| Image::new(8, 8, 1, 0.2 + 0.1 * k as f64).unwrap())
            .collect();
        let out = upconvert(&frames, 8, &opts()).unwrap();
        assert_eq!(out.len(), 2 * 8 + 1);
        assert_eq!(out[0].image, frames[0]);
        assert_eq!(out[8].image, frames[1]);
        assert_eq!((out[8].gap, out[8].num, out[8].den), (1, 0, 1));
        assert_eq!((out[2].num, out[2].den), (1, 4));
        assert_eq!(out[16].file_name(), "frame_00002_0-1.png");
        let out = upconvert(&frames, 2, &opts()).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!((out[1].num, out[1].den), (1, 2));
    }

    #[test]
    fn sixteen_times_keeps_inputs() {
        let frames: Vec<Image> = (0..2)
            .map(|k| Image::new(8, 8, 1, 0.3 + 0.2 * k as f64).unwrap())
            .collect();
        let out = upconvert(&frames, 16, &opts()).unwrap();
        assert_eq!(out.len(), 17);
        assert_eq!(out[0].image, frames[0]);
        assert_eq!(out[16].image, frames[1]);
        assert_eq!((out[4].num, out[4].den), (1, 4));
    }
}
