//! Normalization forward passes.
//!
//! QuadNorm computes quadrature-weighted moments (trapezoid weights on
//! uniform endpoint and periodic grids, control volumes on nonuniform grids)
//! under a layer / instance / group reduction, then applies the standard
//! `gamma (x - mu) / sqrt(v + eps) + beta` transform. BlendQuadNorm blends
//! LayerNorm statistics with their quadrature-weighted counterparts before
//! normalizing. The baselines always use uniform point weights; keeping that
//! asymmetry on nonuniform grids is deliberate.

use crate::error::{Error, Result};
use crate::grid::FieldTensor;
use crate::quadrature::quadrature_weights;
use crate::stats::{blend_moments, uniform_moments, weighted_moments, Moments, ReductionPattern};
use crate::sum::pairwise_sum;

/// Reduction mode of the pure quadrature-weighted variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadMode {
    Layer,
    Instance,
    Group(usize),
}

impl QuadMode {
    pub fn pattern(&self) -> ReductionPattern {
        match self {
            QuadMode::Layer => ReductionPattern::Layer,
            QuadMode::Instance => ReductionPattern::Instance,
            QuadMode::Group(g) => ReductionPattern::Group(*g),
        }
    }
}

/// Baseline methods with uniform point weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    None,
    LayerNorm,
    InstanceNorm,
    GroupNorm(usize),
    RmsNorm,
}

/// Every normalization this crate can run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMethod {
    None,
    LayerNorm,
    InstanceNorm,
    GroupNorm(usize),
    RmsNorm,
    QuadNorm(QuadMode),
    BlendQuadNorm(f64),
}

impl NormMethod {
    pub fn label(&self) -> String {
        match self {
            NormMethod::None => "none".into(),
            NormMethod::LayerNorm => "layernorm".into(),
            NormMethod::InstanceNorm => "instancenorm".into(),
            NormMethod::GroupNorm(g) => format!("groupnorm:{g}"),
            NormMethod::RmsNorm => "rmsnorm".into(),
            NormMethod::QuadNorm(QuadMode::Layer) => "quadnorm:layer".into(),
            NormMethod::QuadNorm(QuadMode::Instance) => "quadnorm:instance".into(),
            NormMethod::QuadNorm(QuadMode::Group(g)) => format!("quadnorm:group:{g}"),
            NormMethod::BlendQuadNorm(a) => format!("blendquadnorm:{a}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("groupnorm:") {
            let g = rest
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad group count in '{s}'")))?;
            return Ok(NormMethod::GroupNorm(g));
        }
        if let Some(rest) = s.strip_prefix("quadnorm:") {
            return Ok(match rest {
                "layer" => NormMethod::QuadNorm(QuadMode::Layer),
                "instance" => NormMethod::QuadNorm(QuadMode::Instance),
                other => {
                    if let Some(g) = other.strip_prefix("group:") {
                        let g = g.parse().map_err(|_| {
                            Error::InvalidArgument(format!("bad group count in '{s}'"))
                        })?;
                        NormMethod::QuadNorm(QuadMode::Group(g))
                    } else {
                        return Err(Error::InvalidArgument(format!(
                            "unknown quadnorm mode '{other}'"
                        )));
                    }
                }
            });
        }
        if let Some(rest) = s.strip_prefix("blendquadnorm:") {
            let a: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad alpha in '{s}'")))?;
            return Ok(NormMethod::BlendQuadNorm(a));
        }
        match s {
            "none" => Ok(NormMethod::None),
            "layernorm" => Ok(NormMethod::LayerNorm),
            "instancenorm" => Ok(NormMethod::InstanceNorm),
            "groupnorm" => Ok(NormMethod::GroupNorm(8)),
            "rmsnorm" => Ok(NormMethod::RmsNorm),
            "quadnorm" => Ok(NormMethod::QuadNorm(QuadMode::Layer)),
            "blendquadnorm" => Ok(NormMethod::BlendQuadNorm(DEFAULT_BLEND_ALPHA)),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_BLEND_ALPHA: f64 = 0.3;
pub const DEFAULT_GROUPS: usize = 8;

/// Per-channel affine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParams {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Method + epsilon + optional affine transform.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    pub method: NormMethod,
    pub epsilon: f64,
    pub affine: Option<AffineParams>,
}

impl NormSpec {
    pub fn new(method: NormMethod) -> Self {
        Self {
            method,
            epsilon: DEFAULT_EPSILON,
            affine: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_affine(mut self, gamma: Vec<f64>, beta: Vec<f64>) -> Self {
        self.affine = Some(AffineParams { gamma, beta });
        self
    }

    fn validate(&self, channels: usize) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if let Some(a) = &self.affine {
            if a.gamma.len() != channels || a.beta.len() != channels {
                return Err(Error::ShapeMismatch(format!(
                    "affine parameters need length C = {channels}, got gamma {} / beta {}",
                    a.gamma.len(),
                    a.beta.len()
                )));
            }
        }
        Ok(())
    }

    fn gamma(&self, c: usize) -> f64 {
        self.affine.as_ref().map_or(1.0, |a| a.gamma[c])
    }

    fn beta(&self, c: usize) -> f64 {
        self.affine.as_ref().map_or(0.0, |a| a.beta[c])
    }
}

/// Applies `gamma_c (x - mu) / sqrt(v + eps) + beta_c` with the moments
/// broadcast over the pattern's slices.
pub fn normalize(x: &FieldTensor, m: &Moments, spec: &NormSpec) -> Result<FieldTensor> {
    let (b, c, n) = (x.batch(), x.channels(), x.num_nodes());
    spec.validate(c)?;
    let slices = m.pattern().num_slices(c)?;
    if m.mean().dim() != (b, slices) {
        return Err(Error::ShapeMismatch(format!(
            "moments shaped {:?}, expected ({b}, {slices})",
            m.mean().dim()
        )));
    }
    let data = x.flat();
    let mut out = x.data().clone();
    {
        let mut oflat = out
            .view_mut()
            .into_shape_with_order((b, c, n))
            .expect("standard layout reshape");
        for bi in 0..b {
            for ch in 0..c {
                let s = m.pattern().slice_of_channel(c, ch);
                let mu = m.mean()[(bi, s)];
                let denom = (m.variance()[(bi, s)] + spec.epsilon).sqrt();
                let (g, be) = (spec.gamma(ch), spec.beta(ch));
                for i in 0..n {
                    oflat[(bi, ch, i)] = g * (data[(bi, ch, i)] - mu) / denom + be;
                }
            }
        }
    }
    x.like_with(out)
}

/// Pure quadrature-weighted normalization: weights chosen automatically by
/// grid kind, statistics under the requested reduction mode.
pub fn quadnorm_forward(x: &FieldTensor, mode: QuadMode, spec: &NormSpec) -> Result<FieldTensor> {
    let w = quadrature_weights(x.grid())?;
    let m = weighted_moments(x, &w, mode.pattern())?;
    normalize(x, &m, spec)
}

/// BlendQuadNorm forward pass: LayerNorm statistics and weighted LayerNorm
/// statistics blended with coefficient `alpha`, then the usual transform.
/// `alpha = 1` recovers LayerNorm, `alpha = 0` recovers the pure weighted
/// endpoint (WLN).
pub fn blendquadnorm_forward(x: &FieldTensor, alpha: f64, spec: &NormSpec) -> Result<FieldTensor> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0,1], got {alpha}"
        )));
    }
    let m_ln = uniform_moments(x, ReductionPattern::Layer)?;
    let w = quadrature_weights(x.grid())?;
    let m_wln = weighted_moments(x, &w, ReductionPattern::Layer)?;
    let m = blend_moments(&m_ln, &m_wln, alpha)?;
    normalize(x, &m, spec)
}

/// Uniform-weight baselines. `None` is the identity; RMSNorm scales by
/// `1/sqrt(mean(x^2) + eps)` per channel over the spatial axes without mean
/// centering (per-channel gamma applies, no beta).
pub fn baseline_forward(
    x: &FieldTensor,
    method: BaselineMethod,
    spec: &NormSpec,
) -> Result<FieldTensor> {
    let c = x.channels();
    spec.validate(c)?;
    match method {
        BaselineMethod::None => Ok(x.clone()),
        BaselineMethod::LayerNorm => {
            let m = uniform_moments(x, ReductionPattern::Layer)?;
            normalize(x, &m, spec)
        }
        BaselineMethod::InstanceNorm => {
            let m = uniform_moments(x, ReductionPattern::Instance)?;
            normalize(x, &m, spec)
        }
        BaselineMethod::GroupNorm(g) => {
            let m = uniform_moments(x, ReductionPattern::Group(g))?;
            normalize(x, &m, spec)
        }
        BaselineMethod::RmsNorm => {
            let (b, c, n) = (x.batch(), c, x.num_nodes());
            let data = x.flat();
            let mut out = x.data().clone();
            {
                let mut oflat = out
                    .view_mut()
                    .into_shape_with_order((b, c, n))
                    .expect("standard layout reshape");
                for bi in 0..b {
                    for ch in 0..c {
                        let row = data.slice(ndarray::s![bi, ch, ..]);
                        let row = row.as_slice().expect("contiguous lane");
                        let ms = pairwise_sum(n, &|i| row[i] * row[i]) / n as f64;
                        let scale = spec.gamma(ch) / (ms + spec.epsilon).sqrt();
                        for i in 0..n {
                            oflat[(bi, ch, i)] = scale * row[i];
                        }
                    }
                }
            }
            x.like_with(out)
        }
    }
}

/// Dispatches on `spec.method`.
pub fn forward(x: &FieldTensor, spec: &NormSpec) -> Result<FieldTensor> {
    match spec.method {
        NormMethod::None => baseline_forward(x, BaselineMethod::None, spec),
        NormMethod::LayerNorm => baseline_forward(x, BaselineMethod::LayerNorm, spec),
        NormMethod::InstanceNorm => baseline_forward(x, BaselineMethod::InstanceNorm, spec),
        NormMethod::GroupNorm(g) => baseline_forward(x, BaselineMethod::GroupNorm(g), spec),
        NormMethod::RmsNorm => baseline_forward(x, BaselineMethod::RmsNorm, spec),
        NormMethod::QuadNorm(mode) => quadnorm_forward(x, mode, spec),
        NormMethod::BlendQuadNorm(a) => blendquadnorm_forward(x, a, spec),
    }
}

/// Energy-balancing residual gain:
/// `y = x + alpha0 sqrt(E[|x|^2] / (E[|Fx|^2] + eps)) Fx`,
/// with expectations taken as plain means over all entries of each batch
/// element. A zero residual branch returns `x` unchanged.
pub fn residual_gain(
    x: &FieldTensor,
    fx: &FieldTensor,
    alpha0: f64,
    epsilon: f64,
) -> Result<FieldTensor> {
    if x.data().shape() != fx.data().shape() {
        return Err(Error::ShapeMismatch(
            "residual gain needs matching shapes".into(),
        ));
    }
    if alpha0 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha0 must be >= 0, got {alpha0}"
        )));
    }
    let (b, c, n) = (x.batch(), x.channels(), x.num_nodes());
    let xs = x.flat();
    let fs = fx.flat();
    let count = (c * n) as f64;
    let mut out = x.data().clone();
    {
        let mut oflat = out
            .view_mut()
            .into_shape_with_order((b, c, n))
            .expect("standard layout reshape");
        for bi in 0..b {
            let ex = (0..c)
                .map(|ch| {
                    let row = xs.slice(ndarray::s![bi, ch, ..]);
                    let row = row.as_slice().expect("contiguous lane");
                    pairwise_sum(n, &|i| row[i] * row[i])
                })
                .sum::<f64>()
                / count;
            let ef = (0..c)
                .map(|ch| {
                    let row = fs.slice(ndarray::s![bi, ch, ..]);
                    let row = row.as_slice().expect("contiguous lane");
                    pairwise_sum(n, &|i| row[i] * row[i])
                })
                .sum::<f64>()
                / count;
            if ef == 0.0 {
                continue; // zero residual branch: y = x
            }
            let gain = alpha0 * (ex / (ef + epsilon)).sqrt();
            for ch in 0..c {
                for i in 0..n {
                    oflat[(bi, ch, i)] = xs[(bi, ch, i)] + gain * fs[(bi, ch, i)];
                }
            }
        }
    }
    x.like_with(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{periodic_grid, sample_field, uniform_grid, FieldId, FieldTensor};
    use approx::assert_abs_diff_eq;
    use ndarray::ArrayD;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field_1d(values: &[f64]) -> FieldTensor {
        let g = uniform_grid(&[values.len()]).unwrap();
        let data =
            ArrayD::from_shape_vec(ndarray::IxDyn(&[1, 1, values.len()]), values.to_vec()).unwrap();
        FieldTensor::new(data, g).unwrap()
    }

    fn random_field(
        rng: &mut ChaCha8Rng,
        b: usize,
        c: usize,
        spatial: &[usize],
        periodic: bool,
    ) -> FieldTensor {
        let g = if periodic {
            periodic_grid(spatial).unwrap()
        } else {
            uniform_grid(spatial).unwrap()
        };
        let mut shape = vec![b, c];
        shape.extend_from_slice(spatial);
        let total: usize = shape.iter().product();
        let vals: Vec<f64> = (0..total).map(|_| rng.random_range(-2.0..2.0)).collect();
        FieldTensor::new(
            ArrayD::from_shape_vec(ndarray::IxDyn(&shape), vals).unwrap(),
            g,
        )
        .unwrap()
    }

    fn max_abs_diff(a: &FieldTensor, b: &FieldTensor) -> f64 {
        a.data()
            .iter()
            .zip(b.data().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_field_normalizes_to_beta() {
        let g = uniform_grid(&[5]).unwrap();
        let x = sample_field(&FieldId::Constant(7.0), &g, 1).unwrap();
        let spec = NormSpec::new(NormMethod::QuadNorm(QuadMode::Layer));
        let y = quadnorm_forward(&x, QuadMode::Layer, &spec).unwrap();
        for v in y.data() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        let spec = spec.with_affine(vec![2.0], vec![3.0]);
        let y = quadnorm_forward(&x, QuadMode::Layer, &spec).unwrap();
        for v in y.data() {
            assert_abs_diff_eq!(*v, 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalize_known_values() {
        // (x - 0.5)/sqrt(1/6) at eps = 0
        let x = field_1d(&[0.0, 0.5, 1.0]);
        let m = crate::stats::uniform_moments(&x, ReductionPattern::Instance).unwrap();
        let spec = NormSpec::new(NormMethod::InstanceNorm).with_epsilon(0.0);
        let y = normalize(&x, &m, &spec).unwrap();
        let s = (1.5f64).sqrt();
        let v = y.flat();
        assert_abs_diff_eq!(v[(0, 0, 0)], -s, epsilon = 1e-12);
        assert_abs_diff_eq!(v[(0, 0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[(0, 0, 2)], s, epsilon = 1e-12);

        // affine linearity: gamma = 2, beta = 3 gives 2y + 3
        let spec2 = NormSpec::new(NormMethod::InstanceNorm)
            .with_epsilon(0.0)
            .with_affine(vec![2.0], vec![3.0]);
        let y2 = normalize(&x, &m, &spec2).unwrap();
        for (a, b) in y.data().iter().zip(y2.data().iter()) {
            assert_abs_diff_eq!(2.0 * a + 3.0, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadnorm_instance_uses_weighted_mean() {
        // x^2-in-x field on a 3x3 trapezoid grid: weighted mean 0.375 per channel
        let g = uniform_grid(&[3, 3]).unwrap();
        let mut vals = Vec::new();
        for i in 0..3 {
            let x = i as f64 * 0.5;
            for _ in 0..3 {
                vals.push(x * x);
            }
        }
        let x = FieldTensor::new(
            ArrayD::from_shape_vec(ndarray::IxDyn(&[1, 1, 3, 3]), vals).unwrap(),
            g,
        )
        .unwrap();
        let w = quadrature_weights(x.grid()).unwrap();
        let m = weighted_moments(&x, &w, ReductionPattern::Instance).unwrap();
        assert_abs_diff_eq!(m.mean()[(0, 0)], 0.375, epsilon = 1e-14);
        let spec = NormSpec::new(NormMethod::QuadNorm(QuadMode::Instance)).with_epsilon(0.0);
        let y = quadnorm_forward(&x, QuadMode::Instance, &spec).unwrap();
        // center row value: (0.25 - 0.375)/sigma
        let sigma = m.variance()[(0, 0)].sqrt();
        assert_abs_diff_eq!(
            y.data()[[0, 0, 1, 1]],
            (0.25 - 0.375) / sigma,
            epsilon = 1e-12
        );
    }

    #[test]
    fn periodic_quadnorm_matches_layernorm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_field(&mut rng, 2, 3, &[8, 8], true);
        let spec = NormSpec::new(NormMethod::LayerNorm);
        let a = quadnorm_forward(&x, QuadMode::Layer, &spec).unwrap();
        let b = baseline_forward(&x, BaselineMethod::LayerNorm, &spec).unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-14);
    }

    #[test]
    fn quadnorm_on_uniform_weights_matches_baselines() {
        // On periodic grids the automatic weights are uniform, so every mode
        // must coincide with its uniform-weight baseline.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_field(&mut rng, 2, 4, &[8, 4], true);
        let spec = NormSpec::new(NormMethod::LayerNorm);
        let pairs: [(QuadMode, BaselineMethod); 3] = [
            (QuadMode::Layer, BaselineMethod::LayerNorm),
            (QuadMode::Instance, BaselineMethod::InstanceNorm),
            (QuadMode::Group(2), BaselineMethod::GroupNorm(2)),
        ];
        for (mode, base) in pairs {
            let a = quadnorm_forward(&x, mode, &spec).unwrap();
            let b = baseline_forward(&x, base, &spec).unwrap();
            assert!(max_abs_diff(&a, &b) <= 1e-14, "{mode:?} vs {base:?}");
        }
    }

    #[test]
    fn blend_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_field(&mut rng, 2, 3, &[9, 5], false);
        let spec = NormSpec::new(NormMethod::BlendQuadNorm(0.3));
        let ln = baseline_forward(&x, BaselineMethod::LayerNorm, &spec).unwrap();
        let b1 = blendquadnorm_forward(&x, 1.0, &spec).unwrap();
        assert!(max_abs_diff(&ln, &b1) <= 1e-14);

        let w = quadrature_weights(x.grid()).unwrap();
        let wln_m = weighted_moments(&x, &w, ReductionPattern::Layer).unwrap();
        let wln = normalize(&x, &wln_m, &spec).unwrap();
        let b0 = blendquadnorm_forward(&x, 0.0, &spec).unwrap();
        assert!(max_abs_diff(&wln, &b0) <= 1e-14);

        assert!(blendquadnorm_forward(&x, 1.0001, &spec).is_err());
    }

    #[test]
    fn blend_constant_gives_beta() {
        let g = uniform_grid(&[6, 6]).unwrap();
        let x = sample_field(&FieldId::Constant(4.0), &g, 1).unwrap();
        let spec = NormSpec::new(NormMethod::BlendQuadNorm(0.3)).with_affine(vec![1.0], vec![-2.0]);
        let y = blendquadnorm_forward(&x, 0.3, &spec).unwrap();
        for v in y.data() {
            assert_abs_diff_eq!(*v, -2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn blend_alpha_continuity() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x = random_field(&mut rng, 1, 2, &[9, 9], false);
        let spec = NormSpec::new(NormMethod::BlendQuadNorm(0.3));
        let d = 1e-6;
        let y0 = blendquadnorm_forward(&x, 0.3, &spec).unwrap();
        let y1 = blendquadnorm_forward(&x, 0.3 + d, &spec).unwrap();
        let y2 = blendquadnorm_forward(&x, 0.3 + 2.0 * d, &spec).unwrap();
        let d1 = max_abs_diff(&y0, &y1);
        let d2 = max_abs_diff(&y0, &y2);
        assert!(d1 <= 1e-4, "alpha step changed output by {d1}");
        // linear response: doubling the step roughly doubles the difference
        assert!((d2 / d1 - 2.0).abs() < 0.1, "d1 = {d1}, d2 = {d2}");
    }

    #[test]
    fn rmsnorm_constant_field() {
        let g = uniform_grid(&[4]).unwrap();
        let x = sample_field(&FieldId::Constant(2.0), &g, 1).unwrap();
        let spec = NormSpec::new(NormMethod::RmsNorm).with_epsilon(1e-5);
        let y = baseline_forward(&x, BaselineMethod::RmsNorm, &spec).unwrap();
        let expect = 2.0 / (4.0 + 1e-5f64).sqrt();
        for v in y.data() {
            assert_abs_diff_eq!(*v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn none_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_field(&mut rng, 1, 2, &[5], false);
        let spec = NormSpec::new(NormMethod::None);
        let y = baseline_forward(&x, BaselineMethod::None, &spec).unwrap();
        assert_eq!(x.data(), y.data());
    }

    #[test]
    fn weighted_output_moments_are_standardized() {
        // Affine-free, eps -> 0: the output's own weighted moments are 0/1.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_field(&mut rng, 2, 4, &[9, 7], false);
        let spec = NormSpec::new(NormMethod::QuadNorm(QuadMode::Layer)).with_epsilon(0.0);
        for mode in [QuadMode::Layer, QuadMode::Instance, QuadMode::Group(2)] {
            let y = quadnorm_forward(&x, mode, &spec).unwrap();
            let w = quadrature_weights(y.grid()).unwrap();
            let m = weighted_moments(&y, &w, mode.pattern()).unwrap();
            for mu in m.mean() {
                assert_abs_diff_eq!(*mu, 0.0, epsilon = 1e-10);
            }
            for v in m.variance() {
                assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn idempotent_under_matching_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let x = random_field(&mut rng, 1, 3, &[11, 5], false);
        let spec = NormSpec::new(NormMethod::QuadNorm(QuadMode::Instance)).with_epsilon(0.0);
        let y = quadnorm_forward(&x, QuadMode::Instance, &spec).unwrap();
        let z = quadnorm_forward(&y, QuadMode::Instance, &spec).unwrap();
        assert!(max_abs_diff(&y, &z) < 1e-10);
    }

    #[test]
    fn residual_gain_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_field(&mut rng, 2, 2, &[6], false);
        let zero = x.like_with(ArrayD::zeros(x.data().raw_dim())).unwrap();
        let y = residual_gain(&x, &zero, 0.5, 0.0).unwrap();
        assert_eq!(y.data(), x.data());

        // equal energy, eps = 0: y = x + 0.5 fx
        let y = residual_gain(&x, &x, 0.5, 0.0).unwrap();
        for (a, b) in y.data().iter().zip(x.data().iter()) {
            assert_abs_diff_eq!(*a, 1.5 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn residual_gain_energy_bound() {
        // E|y|^2 <= (1 + alpha0)^2 E|x|^2 by Cauchy-Schwarz
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..25 {
            let x = random_field(&mut rng, 1, 3, &[8], false);
            let f = random_field(&mut rng, 1, 3, &[8], false);
            let y = residual_gain(&x, &f, 0.5, 0.0).unwrap();
            let e = |t: &FieldTensor| {
                t.data().iter().map(|v| v * v).sum::<f64>() / t.data().len() as f64
            };
            assert!(e(&y) <= (1.5f64).powi(2) * e(&x) + 1e-12);
        }
    }

    #[test]
    fn method_labels_roundtrip() {
        for s in [
            "none",
            "layernorm",
            "instancenorm",
            "groupnorm:8",
            "rmsnorm",
            "quadnorm:layer",
            "quadnorm:instance",
            "quadnorm:group:4",
            "blendquadnorm:0.3",
        ] {
            let m = NormMethod::parse(s).unwrap();
            assert_eq!(m.label(), s);
        }
    }
}
