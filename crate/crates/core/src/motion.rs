//! Per-pixel motion prediction toward intermediate timestamps.
//!
//! With the reference at `I_0` and flows to the other inputs known, the cubic model
//! uses
//!
//! ```text
//! a0 = f01 + f0m1                 (acceleration at I_0)
//! a1 = f02 − 2·f01                (acceleration at I_1, referenced at I_0's pixels)
//! v0 = f01 − a0/2 − (a1 − a0)/6   (velocity, from the cubic at t = 1)
//! f0t = f01·t + a0/2·(t² − t) + (a1 − a0)/6·(t³ − t)
//! ```
//!
//! The quadratic model drops the last term and the linear one keeps only `f01·t`.
//! Predictions from `I_1` use the same formula on a mirrored time axis `s = 1 − t`,
//! with `I_0`, `I_2` and `I_{-1}` playing the roles of `I_1`, `I_{-1}` and `I_2`.
//!
//! All arithmetic is `f64`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::flow::FlowField;
use crate::solver::FlowBundle;
use crate::types::TimeStamp;

/// Polynomial degree of the motion model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MotionModelKind {
    Linear,
    #[cfg_attr(feature = "serde", serde(alias = "quad"))]
    Quadratic,
    #[default]
    Cubic,
}

impl MotionModelKind {
    pub const ALL: [MotionModelKind; 3] = [
        MotionModelKind::Linear,
        MotionModelKind::Quadratic,
        MotionModelKind::Cubic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MotionModelKind::Linear => "linear",
            MotionModelKind::Quadratic => "quadratic",
            MotionModelKind::Cubic => "cubic",
        }
    }
}

/// Displacement `I_0 → t` of one scalar component, given the displacements to
/// `I_1`, `I_{-1}` and `I_2`. `t` is not restricted to `(0, 1)` here so that the
/// toy experiments can extrapolate.
#[inline]
pub fn predict_scalar(f01: f64, f0m1: f64, f02: f64, t: f64, kind: MotionModelKind) -> f64 {
    let linear = f01 * t;
    if kind == MotionModelKind::Linear {
        return linear;
    }
    let a0 = f01 + f0m1;
    let quadratic = linear + a0 / 2.0 * (t * t - t);
    if kind == MotionModelKind::Quadratic {
        return quadratic;
    }
    let a1 = f02 - 2.0 * f01;
    quadratic + (a1 - a0) / 6.0 * (t * t * t - t)
}

/// Mirror of [`predict_scalar`] with `I_1` as reference: displacement `I_1 → t`.
#[inline]
pub fn predict_scalar_from_1(f10: f64, f1m1: f64, f12: f64, t: f64, kind: MotionModelKind) -> f64 {
    predict_scalar(f10, f12, f1m1, 1.0 - t, kind)
}

/// Velocity, acceleration and acceleration change rate at `I_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicCoefficients {
    pub v0: FlowField,
    pub a0: FlowField,
    pub delta_a0: FlowField,
}

impl CubicCoefficients {
    /// `v0·t + a0/2·t² + Δa0/6·t³` per pixel.
    pub fn evaluate(&self, t: f64) -> FlowField {
        let (h, w) = self.v0.dims();
        let mut out = self.v0.clone();
        for y in 0..h {
            for x in 0..w {
                let (v, a, d) = (
                    self.v0.get(y, x),
                    self.a0.get(y, x),
                    self.delta_a0.get(y, x),
                );
                let mut r = [0.0; 2];
                for k in 0..2 {
                    r[k] = v[k] * t + a[k] / 2.0 * t * t + d[k] / 6.0 * t * t * t;
                }
                out.set(y, x, r);
            }
        }
        out
    }
}

/// Fits the cubic coefficients at `I_0` from `f01`, `f0m1` and `f02`.
pub fn cubic_coeffs_forward(
    f01: &FlowField,
    f0m1: &FlowField,
    f02: &FlowField,
) -> Result<CubicCoefficients> {
    f01.same_dims(f0m1)?;
    f01.same_dims(f02)?;
    let a0 = f01.add(f0m1)?;
    let a1 = f02.sub(&f01.scale(2.0))?;
    let delta_a0 = a1.sub(&a0)?;
    let v0 = f01.zip_map(&a0, |f, a| [f[0] - a[0] / 2.0, f[1] - a[1] / 2.0])?;
    let v0 = v0.zip_map(&delta_a0, |v, d| [v[0] - d[0] / 6.0, v[1] - d[1] / 6.0])?;
    Ok(CubicCoefficients { v0, a0, delta_a0 })
}

fn predict_field(
    f_near: &FlowField,
    f_back: &FlowField,
    f_far: &FlowField,
    t: f64,
    kind: MotionModelKind,
) -> Result<FlowField> {
    f_near.same_dims(f_back)?;
    f_near.same_dims(f_far)?;
    let (h, w) = f_near.dims();
    FlowField::from_fn(h, w, |y, x| {
        let (n, b, f) = (f_near.get(y, x), f_back.get(y, x), f_far.get(y, x));
        [
            predict_scalar(n[0], b[0], f[0], t, kind),
            predict_scalar(n[1], b[1], f[1], t, kind),
        ]
    })
}

/// `f_{0→t}` from `f_{0→1}`, `f_{0→-1}` and `f_{0→2}`.
pub fn predict_flow_from_0(
    f01: &FlowField,
    f0m1: &FlowField,
    f02: &FlowField,
    t: TimeStamp,
    kind: MotionModelKind,
) -> Result<FlowField> {
    predict_field(f01, f0m1, f02, t.value(), kind)
}

/// `f_{1→t}` from `f_{1→0}`, `f_{1→-1}` and `f_{1→2}`.
pub fn predict_flow_from_1(
    f10: &FlowField,
    f1m1: &FlowField,
    f12: &FlowField,
    t: TimeStamp,
    kind: MotionModelKind,
) -> Result<FlowField> {
    predict_field(f10, f12, f1m1, t.mirrored().value(), kind)
}

/// `(f_{0→t}, f_{1→t})` for every stamp.
pub fn predict_all(
    bundle: &FlowBundle,
    stamps: &[TimeStamp],
    kind: MotionModelKind,
) -> Result<Vec<(FlowField, FlowField)>> {
    stamps
        .iter()
        .map(|&t| {
            Ok((
                predict_flow_from_0(
                    &bundle.f_0_to_1,
                    &bundle.f_0_to_m1,
                    &bundle.f_0_to_2,
                    t,
                    kind,
                )?,
                predict_flow_from_1(
                    &bundle.f_1_to_0,
                    &bundle.f_1_to_m1,
                    &bundle.f_1_to_2,
                    t,
                    kind,
                )?,
            ))
        })
        .collect()
}
