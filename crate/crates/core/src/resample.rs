//! Cross-resolution resampling between uniform grids.
//!
//! Channelwise, separable (axis-by-axis) interpolation. Bilinear uses the
//! two-tap hat kernel; bicubic uses Catmull-Rom cubic convolution with
//! quadratically extrapolated ghost samples at the edges of endpoint grids
//! (replicated edge samples would drop to first order in the boundary cells)
//! and wraparound on periodic grids. Both kernels have unit tap sums, so
//! spatially constant fields are preserved exactly, and both are linear in
//! the input. Downsampling uses the same kernels without an anti-alias
//! prefilter, which is fine for the exact samples of smooth fields used here
//! but will alias on rough data.

use ndarray::{ArrayD, Axis, Zip};

use crate::error::{Error, Result};
use crate::grid::{Axis1D, AxisKind, FieldTensor, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpMethod {
    Bilinear,
    Bicubic,
}

impl InterpMethod {
    pub fn label(&self) -> &'static str {
        match self {
            InterpMethod::Bilinear => "bilinear",
            InterpMethod::Bicubic => "bicubic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "bilinear" => Ok(InterpMethod::Bilinear),
            "bicubic" => Ok(InterpMethod::Bicubic),
            other => Err(Error::InvalidArgument(format!(
                "unknown interpolation '{other}'"
            ))),
        }
    }
}

/// Catmull-Rom weights for fractional offset `s` in `[0,1)` over taps
/// `[-1, 0, 1, 2]`. At `s = 0` the weights are exactly `[0, 1, 0, 0]`.
fn catmull_rom(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

/// Tap plan for one axis: per target node, the source indices and weights.
fn axis_plan(src: &Axis1D, tgt: &Axis1D, method: InterpMethod) -> Vec<Vec<(usize, f64)>> {
    let n = src.len();
    let mut plan = Vec::with_capacity(tgt.len());
    for &t in tgt.coords() {
        let taps = match (src.kind(), method) {
            (AxisKind::Periodic, InterpMethod::Bilinear) => {
                if n == 1 {
                    vec![(0usize, 1.0)]
                } else {
                    let u = t * n as f64;
                    let i0 = u.floor() as usize % n;
                    let s = u - u.floor();
                    if s == 0.0 {
                        vec![(i0, 1.0)]
                    } else {
                        vec![(i0, 1.0 - s), ((i0 + 1) % n, s)]
                    }
                }
            }
            (AxisKind::Periodic, InterpMethod::Bicubic) => {
                if n == 1 {
                    vec![(0usize, 1.0)]
                } else {
                    let u = t * n as f64;
                    let i0 = u.floor() as isize;
                    let s = u - u.floor();
                    let w = catmull_rom(s);
                    (-1..=2)
                        .map(|k| {
                            let idx = (i0 + k).rem_euclid(n as isize) as usize;
                            (idx, w[(k + 1) as usize])
                        })
                        .collect()
                }
            }
            (_, InterpMethod::Bilinear) => {
                let u = t * (n - 1) as f64;
                let i0 = (u.floor() as usize).min(n - 2);
                let s = u - i0 as f64;
                if s == 0.0 {
                    vec![(i0, 1.0)]
                } else {
                    vec![(i0, 1.0 - s), (i0 + 1, s)]
                }
            }
            (_, InterpMethod::Bicubic) => {
                let u = t * (n - 1) as f64;
                let i0 = (u.floor() as isize).min(n as isize - 2).max(0);
                let s = u - i0 as f64;
                let w = catmull_rom(s);
                let mut taps: Vec<(usize, f64)> = Vec::with_capacity(6);
                let push_ghost = |taps: &mut Vec<(usize, f64)>, j: isize, wt: f64| {
                    // ghost sample one node outside: quadratic extrapolation
                    // keeps the kernel's polynomial reproduction at the edge
                    if j < 0 {
                        if n >= 3 {
                            taps.push((0, 3.0 * wt));
                            taps.push((1, -3.0 * wt));
                            taps.push((2, wt));
                        } else {
                            taps.push((0, 2.0 * wt));
                            taps.push((1, -wt));
                        }
                    } else if n >= 3 {
                        taps.push((n - 1, 3.0 * wt));
                        taps.push((n - 2, -3.0 * wt));
                        taps.push((n - 3, wt));
                    } else {
                        taps.push((n - 1, 2.0 * wt));
                        taps.push((n - 2, -wt));
                    }
                };
                for k in -1..=2isize {
                    let j = i0 + k;
                    let wt = w[(k + 1) as usize];
                    if wt == 0.0 {
                        continue;
                    }
                    if j < 0 || j >= n as isize {
                        push_ghost(&mut taps, j, wt);
                    } else {
                        taps.push((j as usize, wt));
                    }
                }
                taps
            }
        };
        plan.push(taps);
    }
    plan
}

/// Resamples onto the target grid. Source and target must have the same
/// dimension and be both endpoint-inclusive uniform or both periodic.
pub fn interpolate(
    x: &FieldTensor,
    target: &GridSpec,
    method: InterpMethod,
) -> Result<FieldTensor> {
    let src = x.grid();
    if src.dim() != target.dim() {
        return Err(Error::ShapeMismatch(format!(
            "source dim {} vs target dim {}",
            src.dim(),
            target.dim()
        )));
    }
    for (k, (a, b)) in src.axes().iter().zip(target.axes()).enumerate() {
        if a.kind() == AxisKind::Nonuniform || b.kind() == AxisKind::Nonuniform {
            return Err(Error::InvalidArgument(format!(
                "axis {k}: interpolation supports uniform endpoint or periodic axes only"
            )));
        }
        if a.kind() != b.kind() {
            return Err(Error::InvalidArgument(format!(
                "axis {k}: mixed grid kinds ({} vs {})",
                a.kind().label(),
                b.kind().label()
            )));
        }
    }

    let mut data = x.data().clone();
    for k in 0..src.dim() {
        let plan = axis_plan(src.axis(k), target.axis(k), method);
        let axis = Axis(2 + k);
        let mut shape = data.shape().to_vec();
        shape[2 + k] = target.axis(k).len();
        let mut out = ArrayD::zeros(ndarray::IxDyn(&shape));
        Zip::from(out.lanes_mut(axis))
            .and(data.lanes(axis))
            .for_each(|mut o, lane| {
                for (t, taps) in plan.iter().enumerate() {
                    let mut acc = 0.0;
                    for &(j, w) in taps {
                        acc += w * lane[j];
                    }
                    o[t] = acc;
                }
            });
        data = out;
    }
    FieldTensor::new(data, target.clone())
}
