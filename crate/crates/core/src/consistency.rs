//! Cross-resolution mismatch measurements and empirical convergence orders.
//!
//! The exact endpoint identities ([`first_order_identity`],
//! [`endpoint_perturbation`]) are pure algebra on the samples and must hold
//! to near machine precision; the ladder experiments measure how statistic
//! and normalized-output mismatches decay under refinement.

use crate::error::{Error, Result};
use crate::grid::{sample_field, FieldId, FieldTensor, GridSpec};
use crate::normalize::{forward, NormSpec};
use crate::quadrature::{weights_for_grid, Rule, WeightField};
use crate::resample::{interpolate, InterpMethod};
use crate::stats::{uniform_moments, weighted_moments, Moments, ReductionPattern};
use crate::sum::pairwise_sum;

/// Variance floor for the output-consistency experiments.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Quadrature-weighted discrete comparison norm:
/// `sqrt(sum_i w_i ||z(r_i)||_2^2)` with the channel (and batch) 2-norm
/// inside the node sum.
pub fn comparison_norm(z: &FieldTensor, w: &WeightField) -> Result<f64> {
    if w.grid().spatial_shape() != z.grid().spatial_shape() {
        return Err(Error::ShapeMismatch(format!(
            "weights shaped {:?} vs field spatial shape {:?}",
            w.grid().spatial_shape(),
            z.grid().spatial_shape()
        )));
    }
    let (b, c, n) = (z.batch(), z.channels(), z.num_nodes());
    let data = z.flat();
    let wflat = w.flat();
    let total = pairwise_sum(n, &|i| {
        let mut node = 0.0;
        for bi in 0..b {
            for ch in 0..c {
                let v = data[(bi, ch, i)];
                node += v * v;
            }
        }
        wflat[i] * node
    });
    Ok(total.sqrt())
}

/// Mean and variance mismatch between the statistics of the same analytic
/// field sampled on two grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatMismatch {
    pub mean: f64,
    pub variance: f64,
}

fn moments_for(
    field: &FieldId,
    grid: &GridSpec,
    rule: Rule,
    pattern: ReductionPattern,
    channels: usize,
) -> Result<Moments> {
    let x = sample_field(field, grid, channels)?;
    if rule == Rule::Uniform {
        uniform_moments(&x, pattern)
    } else {
        let w = weights_for_grid(grid, rule)?;
        weighted_moments(&x, &w, pattern)
    }
}

/// `max |mu_h - mu_h'|` (and likewise for the variance) over the reduced
/// slices, with both grids carrying exact nodal samples of the field.
pub fn statistic_mismatch(
    field: &FieldId,
    h_grid: &GridSpec,
    hp_grid: &GridSpec,
    rule: Rule,
    pattern: ReductionPattern,
) -> Result<StatMismatch> {
    let channels = 1;
    let a = moments_for(field, h_grid, rule, pattern, channels)?;
    let b = moments_for(field, hp_grid, rule, pattern, channels)?;
    let mut mean = 0.0f64;
    let mut var = 0.0f64;
    for (x, y) in a.mean().iter().zip(b.mean().iter()) {
        mean = mean.max((x - y).abs());
    }
    for (x, y) in a.variance().iter().zip(b.variance().iter()) {
        var = var.max((x - y).abs());
    }
    Ok(StatMismatch {
        mean,
        variance: var,
    })
}

/// Least-squares slope of `log(value)` against `log(h)`. Rungs with
/// non-positive values are dropped; fewer than 3 surviving rungs is an error.
pub fn order_estimate(ladder: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .copied()
        .filter(|(h, v)| *h > 0.0 && *v > 0.0)
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "order estimate needs >= 3 positive rungs, got {}",
            pts.len()
        )));
    }
    let (slope, _) = fit_loglog(&pts);
    Ok(slope)
}

/// Least-squares fit of `ln y = slope ln x + ln intercept`; callers must
/// pass positive points.
pub(crate) fn fit_loglog(pts: &[(f64, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = num / den;
    let intercept = (my - slope * mx).exp();
    (slope, intercept)
}

/// Exact first-order identity for endpoint-inclusive uniform averaging:
/// returns `(lhs, rhs)` with `lhs = mu_disc - mu_trap` and
/// `rhs = ((m-2)/(m(m-1))) ((f(0)+f(1))/2 - mean of interior samples)`.
/// The two agree to machine precision for any samples.
pub fn first_order_identity(samples: &[f64]) -> Result<(f64, f64)> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "identity needs m >= 3 samples, got {m}"
        )));
    }
    let h = 1.0 / (m - 1) as f64;
    let f0 = samples[0];
    let f1 = samples[m - 1];
    let interior = &samples[1..m - 1];
    let interior_sum = pairwise_sum(interior.len(), &|i| interior[i]);
    let interior_mean = interior_sum / (m - 2) as f64;
    let mu_disc = pairwise_sum(m, &|i| samples[i]) / m as f64;
    let mu_trap = h / 2.0 * (f0 + f1) + h * interior_sum;
    let lhs = mu_disc - mu_trap;
    let rhs = (m - 2) as f64 / (m * (m - 1)) as f64 * ((f0 + f1) / 2.0 - interior_mean);
    Ok((lhs, rhs))
}

/// Endpoint-correction perturbation: returns `(exact, leading)` with
/// `exact = mu_trap - mu_unif = ((m-2)/(m(m-1))) (interior mean - boundary
/// average)` and `leading = h (interior mean - boundary average)`; the gap
/// between the two is O(h^2).
pub fn endpoint_perturbation(samples: &[f64]) -> Result<(f64, f64)> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "perturbation needs m >= 3 samples, got {m}"
        )));
    }
    let h = 1.0 / (m - 1) as f64;
    let (lhs, _) = first_order_identity(samples)?;
    let exact = -lhs;
    let interior = &samples[1..m - 1];
    let interior_mean = pairwise_sum(interior.len(), &|i| interior[i]) / (m - 2) as f64;
    let bracket = interior_mean - (samples[0] + samples[m - 1]) / 2.0;
    Ok((exact, h * bracket))
}

/// Max absolute difference between quadrature-weighted and uniform statistics
/// on a periodic grid; the trapezoid weights degenerate to uniform there, so
/// the result must sit at floating-point noise.
pub fn periodic_collapse_check(x: &FieldTensor, pattern: ReductionPattern) -> Result<f64> {
    if !x.grid().is_fully_periodic() {
        return Err(Error::InvalidGrid(
            "periodic collapse check needs a periodic grid".into(),
        ));
    }
    let w = crate::quadrature::quadrature_weights(x.grid())?;
    let a = weighted_moments(x, &w, pattern)?;
    let b = uniform_moments(x, pattern)?;
    a.max_abs_diff(&b)
}

/// Normalized-output mismatch `||N_h(x_h) - P_{h'->h} N_{h'}(x_{h'})||` in
/// the trapezoid comparison norm on the `h` grid. Errors if the weighted
/// variance on either grid falls below [`VARIANCE_FLOOR`].
pub fn output_mismatch(
    field: &FieldId,
    spec: &NormSpec,
    h_grid: &GridSpec,
    hp_grid: &GridSpec,
    method: InterpMethod,
    channels: usize,
) -> Result<f64> {
    let x_h = sample_field(field, h_grid, channels)?;
    let x_hp = sample_field(field, hp_grid, channels)?;
    for x in [&x_h, &x_hp] {
        let w = crate::quadrature::quadrature_weights(x.grid())?;
        let m = weighted_moments(x, &w, ReductionPattern::Layer)?;
        for v in m.variance() {
            if *v < VARIANCE_FLOOR {
                return Err(Error::DegenerateField(format!(
                    "weighted variance {v} below floor {VARIANCE_FLOOR}"
                )));
            }
        }
    }
    let y_h = forward(&x_h, spec)?;
    let y_hp = forward(&x_hp, spec)?;
    let y_hp_on_h = interpolate(&y_hp, h_grid, method)?;
    let diff = y_h.like_with(y_h.data() - y_hp_on_h.data())?;
    let w = weights_for_grid(h_grid, Rule::Trapezoid)?;
    comparison_norm(&diff, &w)
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRung {
    /// Nodes per axis of the coarser grid in the pair.
    pub n: usize,
    /// Spacing of the coarser grid.
    pub h: f64,
    pub mean_mismatch: f64,
    pub var_mismatch: f64,
}

/// Statistic-mismatch ladder with its fitted orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub field: FieldId,
    pub rule: Rule,
    pub pattern: ReductionPattern,
    pub dim: usize,
    pub rungs: Vec<LadderRung>,
    /// Fitted order of the mean mismatch (the headline number). NaN when the
    /// mismatches sit at machine zero on too many rungs to fit a slope, which
    /// happens when a rule integrates the field exactly.
    pub fitted_order: f64,
    /// Fitted order of the variance mismatch; NaN as above.
    pub fitted_order_var: f64,
}

/// Runs `statistic_mismatch` over consecutive ladder pairs `(n_k, n_{k+1})`
/// of endpoint-inclusive uniform grids (`dim`-dimensional, isotropic) and
/// fits the orders against the coarser spacing.
pub fn consistency_ladder(
    field: &FieldId,
    ns: &[usize],
    dim: usize,
    rule: Rule,
    pattern: ReductionPattern,
) -> Result<ConsistencyReport> {
    if ns.len() < 2 {
        return Err(Error::InvalidArgument(
            "ladder needs at least 2 resolutions".into(),
        ));
    }
    for w in ns.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "ladder must be strictly refining".into(),
            ));
        }
    }
    let mut rungs = Vec::new();
    for pair in ns.windows(2) {
        let g1 = crate::grid::uniform_grid(&vec![pair[0]; dim])?;
        let g2 = crate::grid::uniform_grid(&vec![pair[1]; dim])?;
        let mm = statistic_mismatch(field, &g1, &g2, rule, pattern)?;
        rungs.push(LadderRung {
            n: pair[0],
            h: 1.0 / (pair[0] - 1) as f64,
            mean_mismatch: mm.mean,
            var_mismatch: mm.variance,
        });
    }
    let fitted_order = order_estimate(
        &rungs
            .iter()
            .map(|r| (r.h, r.mean_mismatch))
            .collect::<Vec<_>>(),
    )
    .unwrap_or(f64::NAN);
    let fitted_order_var = order_estimate(
        &rungs
            .iter()
            .map(|r| (r.h, r.var_mismatch))
            .collect::<Vec<_>>(),
    )
    .unwrap_or(f64::NAN);
    Ok(ConsistencyReport {
        field: field.clone(),
        rule,
        pattern,
        dim,
        rungs,
        fitted_order,
        fitted_order_var,
    })
}

/// Output-mismatch ladder: pairs each `n` with `n' = 2n - 1` (h' = h/2) and
/// fits the normalized-output mismatch order.
pub fn output_mismatch_ladder(
    field: &FieldId,
    spec: &NormSpec,
    ns: &[usize],
    dim: usize,
    method: InterpMethod,
) -> Result<(Vec<(usize, f64, f64)>, f64)> {
    let mut rows = Vec::new();
    for &n in ns {
        let h_grid = crate::grid::uniform_grid(&vec![n; dim])?;
        let hp_grid = crate::grid::uniform_grid(&vec![2 * n - 1; dim])?;
        let h = 1.0 / (n - 1) as f64;
        let v = output_mismatch(field, spec, &h_grid, &hp_grid, method, 1)?;
        rows.push((n, h, v));
    }
    let order = order_estimate(&rows.iter().map(|(_, h, v)| (*h, *v)).collect::<Vec<_>>())?;
    Ok((rows, order))
}
