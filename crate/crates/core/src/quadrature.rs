//! 1D quadrature weight vectors and tensor-product weight fields.
//!
//! All weight fields integrate the constant 1 to the domain measure: the
//! weights sum to `|Omega| = 1` and factor as an outer product of per-axis
//! vectors. On periodic axes the composite trapezoidal weights degenerate to
//! the uniform weights `1/n`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::ArrayD;

use crate::error::{Error, Result};
use crate::grid::{Axis1D, AxisKind, GridSpec};

/// Weight-generating rule for a grid or axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Equal point weights `1/n` per axis (plain averaging).
    Uniform,
    /// Composite trapezoid: half weight at the endpoints of endpoint
    /// -inclusive axes; uniform on periodic axes.
    Trapezoid,
    /// Composite Simpson; needs `(n-1)` divisible by 2.
    Simpson,
    /// Composite Boole; needs `(n-1)` divisible by 4.
    Boole,
    /// Half-cell control volumes on (possibly nonuniform) coordinates.
    ControlVolume,
    /// Tensor product of differing per-axis rules.
    Mixed,
}

impl Rule {
    pub fn label(&self) -> &'static str {
        match self {
            Rule::Uniform => "uniform",
            Rule::Trapezoid => "trapezoid",
            Rule::Simpson => "simpson",
            Rule::Boole => "boole",
            Rule::ControlVolume => "control_volume",
            Rule::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Rule::Uniform),
            "trapezoid" => Ok(Rule::Trapezoid),
            "simpson" => Ok(Rule::Simpson),
            "boole" => Ok(Rule::Boole),
            "control_volume" | "control-volume" => Ok(Rule::ControlVolume),
            other => Err(Error::InvalidArgument(format!("unknown rule '{other}'"))),
        }
    }
}

/// Newton-Cotes variants beyond trapezoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonCotes {
    Simpson,
    Boole,
}

/// Per-node quadrature weights for a grid, with the generating rule and the
/// per-axis factors retained.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    weights: ArrayD<f64>,
    per_axis: Vec<Vec<f64>>,
    rule: Rule,
    grid: GridSpec,
}

impl WeightField {
    pub fn weights(&self) -> &ArrayD<f64> {
        &self.weights
    }

    /// Weights flattened in row-major node order.
    pub fn flat(&self) -> &[f64] {
        self.weights
            .as_slice()
            .expect("weights are standard layout")
    }

    pub fn per_axis(&self) -> &[Vec<f64>] {
        &self.per_axis
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn total_mass(&self) -> f64 {
        crate::sum::pairwise_sum(self.flat().len(), &|i| self.flat()[i])
    }
}

/// Composite trapezoidal weights on a uniform endpoint or periodic axis.
///
/// Endpoint axes get `h/2` at each end and `h` inside with `h = 1/(n-1)`;
/// periodic axes get the uniform weight `1/n` everywhere. Nonuniform axes are
/// rejected: use [`control_volume_weights_1d`] for those.
pub fn trapezoid_weights_1d(axis: &Axis1D) -> Result<Vec<f64>> {
    match axis.kind() {
        AxisKind::UniformEndpoint => {
            let n = axis.len();
            let h = 1.0 / (n - 1) as f64;
            let mut w = vec![h; n];
            w[0] = h / 2.0;
            w[n - 1] = h / 2.0;
            Ok(w)
        }
        AxisKind::Periodic => {
            let n = axis.len();
            Ok(vec![1.0 / n as f64; n])
        }
        AxisKind::Nonuniform => Err(Error::RuleIncompatible(
            "trapezoid weights need a uniform endpoint or periodic axis; \
             use control_volume_weights_1d for nonuniform axes"
                .into(),
        )),
    }
}

/// Composite Simpson or Boole weights on a uniform endpoint axis.
///
/// The composite compatibility condition must hold ((n-1) divisible by 2 for
/// Simpson, by 4 for Boole); incompatible node counts are an error rather
/// than a silent fallback.
pub fn newton_cotes_weights_1d(rule: NewtonCotes, axis: &Axis1D) -> Result<Vec<f64>> {
    if axis.kind() != AxisKind::UniformEndpoint {
        return Err(Error::RuleIncompatible(format!(
            "{:?} weights need a uniform endpoint axis, got {}",
            rule,
            axis.kind().label()
        )));
    }
    let n = axis.len();
    let h = 1.0 / (n - 1) as f64;
    match rule {
        NewtonCotes::Simpson => {
            if n < 3 || (n - 1) % 2 != 0 {
                return Err(Error::RuleIncompatible(format!(
                    "composite Simpson needs (n-1) divisible by 2 with n >= 3, got n = {n}"
                )));
            }
            // h/3 * [1, 4, 2, 4, ..., 2, 4, 1]
            let mut w = vec![0.0; n];
            for (j, wj) in w.iter_mut().enumerate() {
                let c = if j == 0 || j == n - 1 {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                *wj = c * h / 3.0;
            }
            Ok(w)
        }
        NewtonCotes::Boole => {
            if n < 5 || (n - 1) % 4 != 0 {
                return Err(Error::RuleIncompatible(format!(
                    "composite Boole needs (n-1) divisible by 4 with n >= 5, got n = {n}"
                )));
            }
            // 2h/45 * [7, 32, 12, 32, 14, 32, 12, 32, 14, ..., 32, 7]
            let mut w = vec![0.0; n];
            for (j, wj) in w.iter_mut().enumerate() {
                let c = if j == 0 || j == n - 1 {
                    7.0
                } else {
                    match j % 4 {
                        0 => 14.0,
                        1 | 3 => 32.0,
                        _ => 12.0,
                    }
                };
                *wj = c * 2.0 * h / 45.0;
            }
            Ok(w)
        }
    }
}

/// Half-cell control-volume weights on strictly increasing coordinates:
/// `w_0 = (x_1 - x_0)/2`, `w_i = (x_{i+1} - x_{i-1})/2`,
/// `w_{n-1} = (x_{n-1} - x_{n-2})/2`. Reduces to the trapezoid weights on a
/// uniform axis.
pub fn control_volume_weights_1d(axis: &Axis1D) -> Result<Vec<f64>> {
    let x = axis.coords();
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidGrid("control volumes need n >= 2".into()));
    }
    if axis.kind() == AxisKind::Periodic {
        // Wrapping cells all have width 1/n on the uniform periodic layout.
        return Ok(vec![1.0 / n as f64; n]);
    }
    let mut w = vec![0.0; n];
    w[0] = (x[1] - x[0]) / 2.0;
    for i in 1..n - 1 {
        w[i] = (x[i + 1] - x[i - 1]) / 2.0;
    }
    w[n - 1] = (x[n - 1] - x[n - 2]) / 2.0;
    Ok(w)
}

/// Equal point weights `1/n`.
pub fn uniform_weights_1d(axis: &Axis1D) -> Vec<f64> {
    vec![1.0 / axis.len() as f64; axis.len()]
}

#[derive(PartialEq, Eq, Hash)]
enum AxisSignature {
    /// Coordinates are implied by (kind, n).
    Structured(AxisKind, usize),
    /// Explicit coordinate bit patterns.
    Coords(Vec<u64>),
}

fn axis_signature(axis: &Axis1D) -> AxisSignature {
    match axis.kind() {
        AxisKind::UniformEndpoint | AxisKind::Periodic => {
            AxisSignature::Structured(axis.kind(), axis.len())
        }
        AxisKind::Nonuniform => {
            AxisSignature::Coords(axis.coords().iter().map(|c| c.to_bits()).collect())
        }
    }
}

type WeightCache = RwLock<HashMap<(Rule, AxisSignature), Arc<Vec<f64>>>>;

fn cache() -> &'static WeightCache {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Weight vector for one axis under a concrete rule, memoized per
/// (rule, axis signature).
pub fn axis_weights(rule: Rule, axis: &Axis1D) -> Result<Vec<f64>> {
    let key = (rule, axis_signature(axis));
    if let Some(w) = cache().read().expect("weight cache poisoned").get(&key) {
        return Ok(w.as_ref().clone());
    }
    let w = match rule {
        Rule::Uniform => uniform_weights_1d(axis),
        Rule::Trapezoid => trapezoid_weights_1d(axis)?,
        Rule::Simpson => newton_cotes_weights_1d(NewtonCotes::Simpson, axis)?,
        Rule::Boole => newton_cotes_weights_1d(NewtonCotes::Boole, axis)?,
        Rule::ControlVolume => control_volume_weights_1d(axis)?,
        Rule::Mixed => {
            return Err(Error::InvalidArgument(
                "Mixed is a recorded rule, not a generator; pick a concrete rule per axis".into(),
            ))
        }
    };
    let arc = Arc::new(w);
    cache()
        .write()
        .expect("weight cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&arc));
    Ok(arc.as_ref().clone())
}

/// Outer product of caller-supplied per-axis weight vectors. The recorded
/// rule is `Mixed` since the generating rules are unknown here.
pub fn tensor_product_weights(per_axis: &[Vec<f64>], grid: &GridSpec) -> Result<WeightField> {
    tensor_product_with_rule(per_axis.to_vec(), grid, Rule::Mixed)
}

fn tensor_product_with_rule(
    per_axis: Vec<Vec<f64>>,
    grid: &GridSpec,
    rule: Rule,
) -> Result<WeightField> {
    if per_axis.len() != grid.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{} weight vectors for a {}-dimensional grid",
            per_axis.len(),
            grid.dim()
        )));
    }
    for (k, (w, axis)) in per_axis.iter().zip(grid.axes()).enumerate() {
        if w.len() != axis.len() {
            return Err(Error::ShapeMismatch(format!(
                "axis {k}: weight vector length {} vs {} nodes",
                w.len(),
                axis.len()
            )));
        }
    }
    let shape = grid.spatial_shape();
    let mut weights = ArrayD::zeros(ndarray::IxDyn(&shape));
    {
        let flat = weights
            .as_slice_mut()
            .expect("fresh array is standard layout");
        let d = per_axis.len();
        let mut idx = vec![0usize; d];
        for slot in flat.iter_mut() {
            let mut w = 1.0;
            for k in 0..d {
                w *= per_axis[k][idx[k]];
            }
            *slot = w;
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    Ok(WeightField {
        weights,
        per_axis,
        rule,
        grid: clone_grid(grid),
    })
}

fn clone_grid(grid: &GridSpec) -> GridSpec {
    grid.clone()
}

/// Weight field for a grid under one rule applied on every axis.
pub fn weights_for_grid(grid: &GridSpec, rule: Rule) -> Result<WeightField> {
    let per_axis = grid
        .axes()
        .iter()
        .map(|axis| axis_weights(rule, axis))
        .collect::<Result<Vec<_>>>()?;
    tensor_product_with_rule(per_axis, grid, rule)
}

/// Automatic rule selection by grid geometry: trapezoid on uniform endpoint
/// and periodic axes, control volumes on nonuniform axes. This is the weight
/// choice used by the quadrature-weighted normalization forward passes.
pub fn quadrature_weights(grid: &GridSpec) -> Result<WeightField> {
    let mut rules = Vec::with_capacity(grid.dim());
    let mut per_axis = Vec::with_capacity(grid.dim());
    for axis in grid.axes() {
        let rule = match axis.kind() {
            AxisKind::UniformEndpoint | AxisKind::Periodic => Rule::Trapezoid,
            AxisKind::Nonuniform => Rule::ControlVolume,
        };
        rules.push(rule);
        per_axis.push(axis_weights(rule, axis)?);
    }
    let recorded = if rules.iter().all(|r| *r == rules[0]) {
        rules[0]
    } else {
        Rule::Mixed
    };
    tensor_product_with_rule(per_axis, grid, recorded)
}
