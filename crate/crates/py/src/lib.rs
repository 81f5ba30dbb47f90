//! Python bindings for the quadnorm crate: grids, analytic fields,
//! quadrature weights, normalization forward passes, cross-resolution
//! measurements, and the paired-statistics toolbox.
//!
//! Fields cross the boundary as flat `list[float]` payloads plus a shape, so
//! no numpy dependency is required on either side; reshape on the Python
//! side as needed.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quadnorm::consistency;
use quadnorm::grid::{self, FieldId, FieldTensor, GridSpec, NonuniformFamily};
use quadnorm::normalize::{self, NormMethod, NormSpec};
use quadnorm::opsim;
use quadnorm::quadrature::{self, Rule};
use quadnorm::resample::{self, InterpMethod};
use quadnorm::statkit;
use quadnorm::stats::{self, ReductionPattern};

fn err(e: quadnorm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Tensor-product grid on `[0,1]^d`.
#[pyclass(name = "Grid", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    /// Endpoint-inclusive uniform grid with nodes `j/(n-1)` per axis.
    #[staticmethod]
    fn uniform(n_per_axis: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::uniform_grid(&n_per_axis).map_err(err)?,
        })
    }

    /// Periodic FFT-style grid with nodes `j/n` per axis.
    #[staticmethod]
    fn periodic(n_per_axis: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::periodic_grid(&n_per_axis).map_err(err)?,
        })
    }

    /// Chebyshev-Lobatto nodes rescaled to `[0,1]`, one axis per entry.
    #[staticmethod]
    fn chebyshev(n_per_axis: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::nonuniform_grid(&NonuniformFamily::Chebyshev, &n_per_axis).map_err(err)?,
        })
    }

    /// Boundary-refined tanh-stretched mesh.
    #[staticmethod]
    fn boundary_refined(strength: f64, n_per_axis: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::nonuniform_grid(
                &NonuniformFamily::BoundaryRefined { strength },
                &n_per_axis,
            )
            .map_err(err)?,
        })
    }

    /// 1D grid from explicit strictly increasing coordinates on `[0,1]`.
    #[staticmethod]
    fn custom(coords: Vec<f64>) -> PyResult<Self> {
        let n = coords.len();
        Ok(Self {
            inner: grid::nonuniform_grid_1d(&NonuniformFamily::Custom(coords), n).map_err(err)?,
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn shape(&self) -> Vec<usize> {
        self.inner.spatial_shape()
    }

    fn coords(&self, axis: usize) -> PyResult<Vec<f64>> {
        if axis >= self.inner.dim() {
            return Err(PyValueError::new_err(format!("axis {axis} out of range")));
        }
        Ok(self.inner.axis(axis).coords().to_vec())
    }

    fn kind(&self, axis: usize) -> PyResult<String> {
        if axis >= self.inner.dim() {
            return Err(PyValueError::new_err(format!("axis {axis} out of range")));
        }
        Ok(self.inner.axis(axis).kind().label().to_string())
    }

    fn nonuniformity_ratio(&self) -> f64 {
        self.inner.nonuniformity_ratio()
    }

    fn __repr__(&self) -> String {
        format!("Grid(shape={:?})", self.inner.spatial_shape())
    }
}

/// `(B, C, spatial...)` field samples tied to a grid.
#[pyclass(name = "Field", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: FieldTensor,
}

#[pymethods]
impl PyField {
    /// Builds a field from a flat row-major payload.
    #[staticmethod]
    fn from_values(
        grid: &PyGrid,
        batch: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> PyResult<Self> {
        let mut shape = vec![batch, channels];
        shape.extend(grid.inner.spatial_shape());
        let data = ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(&shape), values)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            inner: FieldTensor::new(data, grid.inner.clone()).map_err(err)?,
        })
    }

    fn shape(&self) -> Vec<usize> {
        self.inner.data().shape().to_vec()
    }

    /// Flat row-major payload.
    fn values(&self) -> Vec<f64> {
        self.inner.data().iter().copied().collect()
    }

    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: self.inner.grid().clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Field(shape={:?})", self.inner.data().shape())
    }
}

fn parse_field(name: &str) -> PyResult<FieldId> {
    FieldId::parse(name).map_err(err)
}

fn parse_pattern(name: &str) -> PyResult<ReductionPattern> {
    ReductionPattern::parse(name).map_err(err)
}

/// Samples an analytic field (`constant:c`, `linear`, `quadratic1d`,
/// `exp1d`, `mixed2d`, `bump2d`, `periodic2d`) on a grid.
#[pyfunction]
#[pyo3(signature = (name, grid, channels = 1))]
fn sample_field(name: &str, grid: &PyGrid, channels: usize) -> PyResult<PyField> {
    Ok(PyField {
        inner: grid::sample_field(&parse_field(name)?, &grid.inner, channels).map_err(err)?,
    })
}

/// Quadrature weights for a grid; rule `auto` picks trapezoid on uniform and
/// periodic axes, control volumes on nonuniform axes. Returns
/// `(flat_weights, shape)`.
#[pyfunction]
#[pyo3(signature = (grid, rule = "auto"))]
fn weights(grid: &PyGrid, rule: &str) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let wf = if rule == "auto" {
        quadrature::quadrature_weights(&grid.inner).map_err(err)?
    } else {
        quadrature::weights_for_grid(&grid.inner, Rule::parse(rule).map_err(err)?).map_err(err)?
    };
    Ok((wf.flat().to_vec(), grid.inner.spatial_shape()))
}

/// Moments under a reduction pattern; `rule = "uniform"` gives plain
/// averages, `"auto"` the grid's quadrature weights, `alpha` a blend of the
/// two (layer pattern only). Returns `(means, variances)` flattened over
/// `(batch, slice)`.
#[pyfunction]
#[pyo3(signature = (field, pattern = "layer", rule = "auto", alpha = None))]
fn moments(
    field: &PyField,
    pattern: &str,
    rule: &str,
    alpha: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let pattern = parse_pattern(pattern)?;
    let x = &field.inner;
    let m = match alpha {
        Some(a) => {
            let ln = stats::uniform_moments(x, pattern).map_err(err)?;
            let w = quadrature::quadrature_weights(x.grid()).map_err(err)?;
            let wln = stats::weighted_moments(x, &w, pattern).map_err(err)?;
            stats::blend_moments(&ln, &wln, a).map_err(err)?
        }
        None if rule == "uniform" => stats::uniform_moments(x, pattern).map_err(err)?,
        None => {
            let w = if rule == "auto" {
                quadrature::quadrature_weights(x.grid()).map_err(err)?
            } else {
                quadrature::weights_for_grid(x.grid(), Rule::parse(rule).map_err(err)?)
                    .map_err(err)?
            };
            stats::weighted_moments(x, &w, pattern).map_err(err)?
        }
    };
    Ok((
        m.mean().iter().copied().collect(),
        m.variance().iter().copied().collect(),
    ))
}

/// Normalization forward pass; method strings match the CLI
/// (`layernorm`, `quadnorm:layer`, `blendquadnorm:0.3`, ...).
#[pyfunction]
#[pyo3(signature = (field, method, epsilon = 1e-5))]
fn normalize_forward(field: &PyField, method: &str, epsilon: f64) -> PyResult<PyField> {
    let spec = NormSpec::new(NormMethod::parse(method).map_err(err)?).with_epsilon(epsilon);
    Ok(PyField {
        inner: normalize::forward(&field.inner, &spec).map_err(err)?,
    })
}

/// Energy-balancing residual gain `y = x + a0 sqrt(E|x|^2/(E|Fx|^2+eps)) Fx`.
#[pyfunction]
fn residual_gain(x: &PyField, fx: &PyField, alpha0: f64, epsilon: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: normalize::residual_gain(&x.inner, &fx.inner, alpha0, epsilon).map_err(err)?,
    })
}

/// Channelwise bilinear/bicubic resampling onto a target grid.
#[pyfunction]
#[pyo3(signature = (field, target, method = "bicubic"))]
fn interpolate(field: &PyField, target: &PyGrid, method: &str) -> PyResult<PyField> {
    let m = InterpMethod::parse(method).map_err(err)?;
    Ok(PyField {
        inner: resample::interpolate(&field.inner, &target.inner, m).map_err(err)?,
    })
}

/// Quadrature-weighted comparison norm of a field (trapezoid weights on its
/// own grid).
#[pyfunction]
fn comparison_norm(field: &PyField) -> PyResult<f64> {
    let w = quadrature::weights_for_grid(field.inner.grid(), Rule::Trapezoid).map_err(err)?;
    consistency::comparison_norm(&field.inner, &w).map_err(err)
}

/// Exact identity `(mu_disc - mu_trap, ((m-2)/(m(m-1)))(boundary_avg -
/// interior_mean))` on endpoint-inclusive uniform samples.
#[pyfunction]
fn first_order_identity(samples: Vec<f64>) -> PyResult<(f64, f64)> {
    consistency::first_order_identity(&samples).map_err(err)
}

/// `(mu_trap - mu_unif, h * bracket)` endpoint perturbation.
#[pyfunction]
fn endpoint_perturbation(samples: Vec<f64>) -> PyResult<(f64, f64)> {
    consistency::endpoint_perturbation(&samples).map_err(err)
}

/// Least-squares slope of log(value) against log(h) over `(h, value)` pairs.
#[pyfunction]
fn order_estimate(ladder: Vec<(f64, f64)>) -> PyResult<f64> {
    consistency::order_estimate(&ladder).map_err(err)
}

/// Statistic mismatch of an analytic field between two isotropic uniform
/// grids; returns `(mean_mismatch, var_mismatch)`.
#[pyfunction]
#[pyo3(signature = (name, n, n_prime, dim, rule = "trapezoid", pattern = "layer"))]
fn statistic_mismatch(
    name: &str,
    n: usize,
    n_prime: usize,
    dim: usize,
    rule: &str,
    pattern: &str,
) -> PyResult<(f64, f64)> {
    let field = parse_field(name)?;
    let g1 = grid::uniform_grid(&vec![n; dim]).map_err(err)?;
    let g2 = grid::uniform_grid(&vec![n_prime; dim]).map_err(err)?;
    let mm = consistency::statistic_mismatch(
        &field,
        &g1,
        &g2,
        Rule::parse(rule).map_err(err)?,
        parse_pattern(pattern)?,
    )
    .map_err(err)?;
    Ok((mm.mean, mm.variance))
}

/// Normalized-output mismatch between two resolutions in the comparison norm.
#[pyfunction]
#[pyo3(signature = (name, method, n, n_prime, dim, interp = "bicubic"))]
fn output_mismatch(
    name: &str,
    method: &str,
    n: usize,
    n_prime: usize,
    dim: usize,
    interp: &str,
) -> PyResult<f64> {
    let field = parse_field(name)?;
    let spec = NormSpec::new(NormMethod::parse(method).map_err(err)?);
    let g1 = grid::uniform_grid(&vec![n; dim]).map_err(err)?;
    let g2 = grid::uniform_grid(&vec![n_prime; dim]).map_err(err)?;
    consistency::output_mismatch(
        &field,
        &spec,
        &g1,
        &g2,
        InterpMethod::parse(interp).map_err(err)?,
        1,
    )
    .map_err(err)
}

/// Max |weighted - uniform| statistic difference on a periodic grid.
#[pyfunction]
#[pyo3(signature = (field, pattern = "layer"))]
fn periodic_collapse_check(field: &PyField, pattern: &str) -> PyResult<f64> {
    consistency::periodic_collapse_check(&field.inner, parse_pattern(pattern)?).map_err(err)
}

/// Transfer discrepancy of a frozen stack between two resolutions; returns
/// `(discrepancy, per_layer)`.
#[pyfunction]
#[pyo3(signature = (name, method, source_n, target_n, depth = 4, width = 16, modes = 6, seed = 7))]
#[allow(clippy::too_many_arguments)]
fn transfer_discrepancy(
    name: &str,
    method: &str,
    source_n: usize,
    target_n: usize,
    depth: usize,
    width: usize,
    modes: usize,
    seed: u64,
) -> PyResult<(f64, Vec<f64>)> {
    let field = parse_field(name)?;
    let dim = field.dim().unwrap_or(2);
    let mut spec = opsim::StackSpec::new(depth, width, modes, dim, seed);
    spec.norm = NormSpec::new(NormMethod::parse(method).map_err(err)?);
    let stack = opsim::build_stack(&spec).map_err(err)?;
    let g1 = grid::uniform_grid(&vec![source_n; dim]).map_err(err)?;
    let g2 = grid::uniform_grid(&vec![target_n; dim]).map_err(err)?;
    let rep = opsim::transfer_discrepancy(&stack, &field, &g1, &g2, InterpMethod::Bicubic)
        .map_err(err)?;
    Ok((rep.discrepancy, rep.per_layer))
}

/// Uniform vs control-volume bias of an analytic field on a mesh.
#[pyfunction]
#[pyo3(signature = (name, family = "boundary-refined", strength = 3.0, n = 64))]
fn bias_report<'py>(
    py: Python<'py>,
    name: &str,
    family: &str,
    strength: f64,
    n: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let field = parse_field(name)?;
    let dim = field.dim().unwrap_or(1);
    let fam = match family {
        "boundary-refined" | "boundary_refined" => NonuniformFamily::BoundaryRefined { strength },
        "chebyshev" => NonuniformFamily::Chebyshev,
        other => return Err(PyValueError::new_err(format!("unknown family '{other}'"))),
    };
    let g = if matches!(fam, NonuniformFamily::BoundaryRefined { strength } if strength == 0.0) {
        grid::uniform_grid(&vec![n; dim]).map_err(err)?
    } else {
        grid::nonuniform_grid(&fam, &vec![n; dim]).map_err(err)?
    };
    let r = quadnorm::meshbias::bias_report(&field, &g).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mesh", &r.mesh)?;
    d.set_item("nonuniformity_ratio", r.nonuniformity_ratio)?;
    d.set_item("reference_mean", r.reference_mean)?;
    d.set_item("uniform_estimate", r.uniform_estimate)?;
    d.set_item("weighted_estimate", r.weighted_estimate)?;
    d.set_item("uniform_bias", r.uniform_bias)?;
    d.set_item("weighted_bias", r.weighted_bias)?;
    d.set_item("reduction_factor", r.reduction_factor)?;
    Ok(d)
}

/// Paired bootstrap percentile CI for `1 - mean(b)/mean(a)`.
#[pyfunction]
#[pyo3(signature = (a, b, resamples = 10000, confidence = 0.95, seed = 0))]
fn bootstrap_improvement_ci(
    a: Vec<f64>,
    b: Vec<f64>,
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> PyResult<(f64, f64, f64)> {
    let s = statkit::PairedSamples::new(a, b).map_err(err)?;
    statkit::bootstrap_improvement_ci(&s, resamples, confidence, seed).map_err(err)
}

/// TOST equivalence of paired samples against a margin.
#[pyfunction]
fn tost_equivalence<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    margin: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = statkit::PairedSamples::new(a, b).map_err(err)?;
    let r = statkit::tost_equivalence(&s, margin).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p_value", r.p_value)?;
    d.set_item("equivalent", r.equivalent)?;
    d.set_item("mean_diff", r.mean_diff)?;
    d.set_item("ci90", r.ci90)?;
    Ok(d)
}

/// Holm-Bonferroni step-down rejection flags.
#[pyfunction]
#[pyo3(signature = (p_values, alpha = 0.05))]
fn holm_bonferroni(p_values: Vec<f64>, alpha: f64) -> PyResult<Vec<bool>> {
    statkit::holm_bonferroni(&p_values, alpha).map_err(err)
}

/// Cohen's d with pooled standard deviation; returns `(d, degenerate)`.
#[pyfunction]
fn cohens_d(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, bool)> {
    let s = statkit::PairedSamples::new(a, b).map_err(err)?;
    let r = statkit::cohens_d(&s).map_err(err)?;
    Ok((r.d, r.degenerate))
}

/// Paired t-test on `a - b`; returns `(t, two_sided_p)`.
#[pyfunction]
fn paired_t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let s = statkit::PairedSamples::new(a, b).map_err(err)?;
    statkit::paired_t_test(&s).map_err(err)
}

#[pymodule]
fn quadnorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(sample_field, m)?)?;
    m.add_function(wrap_pyfunction!(weights, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_forward, m)?)?;
    m.add_function(wrap_pyfunction!(residual_gain, m)?)?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_norm, m)?)?;
    m.add_function(wrap_pyfunction!(first_order_identity, m)?)?;
    m.add_function(wrap_pyfunction!(endpoint_perturbation, m)?)?;
    m.add_function(wrap_pyfunction!(order_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(statistic_mismatch, m)?)?;
    m.add_function(wrap_pyfunction!(output_mismatch, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_collapse_check, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(bias_report, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_improvement_ci, m)?)?;
    m.add_function(wrap_pyfunction!(tost_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(holm_bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(cohens_d, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    Ok(())
}
