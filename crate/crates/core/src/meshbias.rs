//! Nonuniform-mesh bias mechanism: uniform point averaging versus
//! control-volume weighting against the exact continuum mean.
//!
//! On skewed meshes the sample density no longer matches cell volume, so the
//! unweighted average converges to a pulled-back integral rather than the
//! true area mean; control-volume weights restore the correct limit. 2D
//! meshes are tensor products of two nonuniform axes with product weights.

use crate::error::{Error, Result};
use crate::grid::{
    nonuniform_grid, sample_field, uniform_grid, FieldId, GridSpec, NonuniformFamily,
};
use crate::quadrature::quadrature_weights;
use crate::stats::{uniform_moments, weighted_moments, ReductionPattern};

/// Denominator floor for the bias-reduction factor.
const BIAS_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub field: FieldId,
    pub mesh: String,
    /// max 1D cell width / min 1D cell width across axes
    pub nonuniformity_ratio: f64,
    /// exact continuum mean of the field
    pub reference_mean: f64,
    pub uniform_estimate: f64,
    pub weighted_estimate: f64,
    pub uniform_bias: f64,
    pub weighted_bias: f64,
    /// uniform bias / weighted bias (floored denominator; 1 by convention
    /// when both biases vanish)
    pub reduction_factor: f64,
}

fn mesh_label(grid: &GridSpec) -> String {
    let kinds: Vec<&str> = grid.axes().iter().map(|a| a.kind().label()).collect();
    format!("{}d:{}", grid.dim(), kinds.join("x"))
}

/// Compares the plain average and the control-volume weighted average of the
/// field samples against the registered exact mean.
pub fn bias_report(field: &FieldId, grid: &GridSpec) -> Result<BiasReport> {
    let exact = field.exact_channel_mean(grid.dim(), 0).ok_or_else(|| {
        Error::UnknownField(format!(
            "{} has no registered exact integral in dimension {}",
            field.label(),
            grid.dim()
        ))
    })?;
    let x = sample_field(field, grid, 1)?;
    let uniform = uniform_moments(&x, ReductionPattern::Layer)?.mean()[(0, 0)];
    let w = quadrature_weights(grid)?;
    let weighted = weighted_moments(&x, &w, ReductionPattern::Layer)?.mean()[(0, 0)];
    let uniform_bias = (uniform - exact).abs();
    let weighted_bias = (weighted - exact).abs();
    let reduction_factor = if uniform_bias <= BIAS_FLOOR && weighted_bias <= BIAS_FLOOR {
        1.0
    } else {
        uniform_bias / weighted_bias.max(BIAS_FLOOR)
    };
    Ok(BiasReport {
        field: field.clone(),
        mesh: mesh_label(grid),
        nonuniformity_ratio: grid.nonuniformity_ratio(),
        reference_mean: exact,
        uniform_estimate: uniform,
        weighted_estimate: weighted,
        uniform_bias,
        weighted_bias,
        reduction_factor,
    })
}

/// Mesh families available to [`bias_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    BoundaryRefined,
    Chebyshev,
}

impl SweepFamily {
    pub fn label(&self) -> &'static str {
        match self {
            SweepFamily::BoundaryRefined => "boundary_refined",
            SweepFamily::Chebyshev => "chebyshev",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "boundary_refined" | "boundary-refined" => Ok(SweepFamily::BoundaryRefined),
            "chebyshev" => Ok(SweepFamily::Chebyshev),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh family '{other}'"
            ))),
        }
    }
}

fn grid_for(field: &FieldId, family: &NonuniformFamily, n: usize) -> Result<GridSpec> {
    let dim = field.dim().unwrap_or(1);
    // strength 0 degenerates to the uniform grid proper
    if let NonuniformFamily::BoundaryRefined { strength } = family {
        if *strength == 0.0 {
            return uniform_grid(&vec![n; dim]);
        }
    }
    nonuniform_grid(family, &vec![n; dim])
}

/// Bias reports over a mesh-family sweep, ordered by nonuniformity ratio.
/// For the boundary-refined family every strength yields one report; the
/// Chebyshev family has no strength parameter and yields a single report.
pub fn bias_sweep(
    field: &FieldId,
    family: SweepFamily,
    strengths: &[f64],
    n: usize,
) -> Result<Vec<BiasReport>> {
    let mut reports = Vec::new();
    match family {
        SweepFamily::BoundaryRefined => {
            for &s in strengths {
                let grid = grid_for(field, &NonuniformFamily::BoundaryRefined { strength: s }, n)?;
                let mut r = bias_report(field, &grid)?;
                r.mesh = format!("boundary_refined:{s}");
                reports.push(r);
            }
        }
        SweepFamily::Chebyshev => {
            let grid = grid_for(field, &NonuniformFamily::Chebyshev, n)?;
            let mut r = bias_report(field, &grid)?;
            r.mesh = "chebyshev".into();
            reports.push(r);
        }
    }
    reports.sort_by(|a, b| {
        a.nonuniformity_ratio
            .partial_cmp(&b.nonuniformity_ratio)
            .expect("finite ratios")
    });
    Ok(reports)
}
