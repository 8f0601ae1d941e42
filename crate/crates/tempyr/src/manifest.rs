//! Frame-sequence manifests and window sampling.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempyr_core::{Image, InputQuad};

use crate::error::{io_err, Error, Result};
use crate::png::read_png;

/// Which frames of each window are inputs and which are ground truth.
/// Indices are 1-based within the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingRule {
    pub window: usize,
    pub stride: usize,
    pub inputs: [usize; 4],
    #[serde(default)]
    pub ground_truth: Vec<usize>,
}

impl Default for SamplingRule {
    fn default() -> Self {
        Self {
            window: 25,
            stride: 24,
            inputs: [1, 9, 17, 25],
            ground_truth: (10..=16).collect(),
        }
    }
}

impl SamplingRule {
    /// Single-frame mode on 7-frame clips: inputs 1, 3, 5, 7 and target 4.
    pub fn single_frame() -> Self {
        Self {
            window: 7,
            stride: 7,
            inputs: [1, 3, 5, 7],
            ground_truth: vec![4],
        }
    }

    /// Frames generated between the middle inputs.
    pub fn num_intermediate(&self) -> usize {
        self.inputs[2] - self.inputs[1] - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Manifest(m));
        if self.window == 0 || self.stride == 0 {
            return bad("window and stride must be positive".into());
        }
        let i = self.inputs;
        if i[0] < 1 || !(i[0] < i[1] && i[1] < i[2] && i[2] < i[3]) || i[3] > self.window {
            return bad(format!(
                "inputs {i:?} must increase within 1..={}",
                self.window
            ));
        }
        if i[2] - i[1] < 2 {
            return bad("middle inputs leave no frame to generate".into());
        }
        if self.num_intermediate().is_multiple_of(2) {
            return bad(format!(
                "{} frames between the middle inputs; an odd count is required",
                self.num_intermediate()
            ));
        }
        if let Some(g) = self.ground_truth.iter().find(|&&g| g <= i[1] || g >= i[2]) {
            return bad(format!(
                "ground-truth index {g} is not between inputs {} and {}",
                i[1], i[2]
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceManifest {
    /// Frame paths, relative to the manifest's directory unless absolute.
    pub frames: Vec<PathBuf>,
    #[serde(default = "default_rate")]
    pub frame_rate: f64,
    #[serde(default)]
    pub sampling: SamplingRule,
    #[serde(skip)]
    base: PathBuf,
}

fn default_rate() -> f64 {
    30.0
}

/// One sampled window: the input quad plus the available ground truth.
#[derive(Debug, Clone)]
pub struct Window {
    pub index: usize,
    pub quad: InputQuad,
    /// `(stamp index, frame)` with stamps counted from 1 after the second input.
    pub truth: Vec<(usize, Image)>,
}

impl SequenceManifest {
    pub fn new(frames: Vec<PathBuf>, frame_rate: f64, sampling: SamplingRule) -> Self {
        Self {
            frames,
            frame_rate,
            sampling,
            base: PathBuf::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut m: SequenceManifest =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.into(),
                source,
            })?;
        m.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::Manifest("frame_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn frame_path(&self, k: usize) -> PathBuf {
        self.base.join(&self.frames[k])
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        (0..self.frames.len()).map(|k| self.frame_path(k)).collect()
    }

    /// Number of complete windows.
    pub fn num_windows(&self) -> usize {
        let s = &self.sampling;
        if self.frames.len() < s.window {
            0
        } else {
            (self.frames.len() - s.window) / s.stride + 1
        }
    }

    pub fn window(&self, index: usize) -> Result<Window> {
        if index >= self.num_windows() {
            return Err(Error::Manifest(format!(
                "window {index} out of range ({} frames give {} windows)",
                self.frames.len(),
                self.num_windows()
            )));
        }
        let s = &self.sampling;
        let start = index * s.stride;
        let load = |i: usize| read_png(&self.frame_path(start + i - 1));
        let quad = InputQuad::new(
            load(s.inputs[0])?,
            load(s.inputs[1])?,
            load(s.inputs[2])?,
            load(s.inputs[3])?,
        )?;
        let truth = s
            .ground_truth
            .iter()
            .map(|&g| Ok((g - s.inputs[1], load(g)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Window { index, quad, truth })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rule() {
        let r = SamplingRule::default();
        r.validate().unwrap();
        assert_eq!(r.num_intermediate(), 7);
        SamplingRule::single_frame().validate().unwrap();
        assert_eq!(SamplingRule::single_frame().num_intermediate(), 1);
    }

    #[test]
    fn invalid_rules() {
        let mut r = SamplingRule::default();
        r.ground_truth.push(17);
        assert!(r.validate().is_err());
        let r = SamplingRule {
            inputs: [1, 9, 8, 25],
            ..SamplingRule::default()
        };
        assert!(r.validate().is_err());
        let r = SamplingRule {
            inputs: [1, 2, 5, 6],
            window: 6,
            stride: 1,
            ground_truth: vec![],
        };
        assert!(r.validate().is_err());
    }

    #[test]
    fn window_count() {
        let m = SequenceManifest::new(vec!["a.png".into(); 49], 30.0, SamplingRule::default());
        assert_eq!(m.num_windows(), 2);
        let m = SequenceManifest::new(vec!["a.png".into(); 24], 30.0, SamplingRule::default());
        assert_eq!(m.num_windows(), 0);
    }

    #[test]
    fn parses_with_defaults() {
        let m: SequenceManifest =
            serde_json::from_str(r#"{"frames": ["a.png", "b.png"]}"#).unwrap();
        assert_eq!(m.sampling, SamplingRule::default());
        assert_eq!(m.frame_rate, 30.0);
    }
}
