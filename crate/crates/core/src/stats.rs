//! Uniform, quadrature-weighted, and blended normalization moments.
//!
//! All variances are population (biased) second central moments computed in
//! a two-pass mean-then-variance sweep; accumulation is always in f64 with a
//! fixed pairwise summation tree, so results are run-to-run identical.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::FieldTensor;
use crate::quadrature::WeightField;
use crate::sum::pairwise_sum;

/// Axes pooled by the normalization statistics.
///
/// - `Instance`: spatial axes only, one slice per `(batch, channel)`.
/// - `Layer`: channels and spatial axes, one slice per batch entry.
/// - `Group(g)`: `g` channel groups and spatial axes, `g` slices per batch
///   entry; requires the channel count to be divisible by `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionPattern {
    Instance,
    Layer,
    Group(usize),
}

impl ReductionPattern {
    /// Number of reduced slices per batch entry.
    pub fn num_slices(&self, channels: usize) -> Result<usize> {
        match self {
            ReductionPattern::Instance => Ok(channels),
            ReductionPattern::Layer => Ok(1),
            ReductionPattern::Group(g) => {
                if *g == 0 || channels % g != 0 {
                    Err(Error::InvalidArgument(format!(
                        "group pattern needs channels divisible by num_groups, got C = {channels}, G = {g}"
                    )))
                } else {
                    Ok(*g)
                }
            }
        }
    }

    /// Channels pooled into each slice (the `m` in the `m * sum(w)`
    /// denominator): 1 for instance, C for layer, C/G for group.
    pub fn channels_per_slice(&self, channels: usize) -> Result<usize> {
        Ok(channels / self.num_slices(channels)?)
    }

    /// Channel range of slice `s`.
    pub fn slice_channels(&self, channels: usize, s: usize) -> std::ops::Range<usize> {
        match self {
            ReductionPattern::Instance => s..s + 1,
            ReductionPattern::Layer => 0..channels,
            ReductionPattern::Group(g) => {
                let per = channels / g;
                s * per..(s + 1) * per
            }
        }
    }

    /// Slice containing channel `c`.
    pub fn slice_of_channel(&self, channels: usize, c: usize) -> usize {
        match self {
            ReductionPattern::Instance => c,
            ReductionPattern::Layer => 0,
            ReductionPattern::Group(g) => c / (channels / g),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ReductionPattern::Instance => "instance".into(),
            ReductionPattern::Layer => "layer".into(),
            ReductionPattern::Group(g) => format!("group:{g}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(g) = s.strip_prefix("group:") {
            let g: usize = g
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad group count in '{s}'")))?;
            return Ok(ReductionPattern::Group(g));
        }
        match s {
            "instance" => Ok(ReductionPattern::Instance),
            "layer" => Ok(ReductionPattern::Layer),
            "group" => Ok(ReductionPattern::Group(8)),
            other => Err(Error::InvalidArgument(format!("unknown pattern '{other}'"))),
        }
    }
}

/// Mean/variance per reduced slice, shaped `(B, S)` with `S` the slice count
/// of the pattern (C for instance, 1 for layer, G for group).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    mean: Array2<f64>,
    variance: Array2<f64>,
    pattern: ReductionPattern,
    weighted: bool,
}

impl Moments {
    pub fn new(
        mean: Array2<f64>,
        variance: Array2<f64>,
        pattern: ReductionPattern,
        weighted: bool,
    ) -> Result<Self> {
        if mean.dim() != variance.dim() {
            return Err(Error::ShapeMismatch(
                "mean and variance shapes differ".into(),
            ));
        }
        if variance.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidArgument(
                "variance must be >= 0 entrywise".into(),
            ));
        }
        Ok(Self {
            mean,
            variance,
            pattern,
            weighted,
        })
    }

    pub fn mean(&self) -> &Array2<f64> {
        &self.mean
    }

    pub fn variance(&self) -> &Array2<f64> {
        &self.variance
    }

    pub fn pattern(&self) -> ReductionPattern {
        self.pattern
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    /// Largest absolute entrywise difference against another moment set
    /// (means and variances both).
    pub fn max_abs_diff(&self, other: &Moments) -> Result<f64> {
        if self.mean.dim() != other.mean.dim() {
            return Err(Error::ShapeMismatch("moment shapes differ".into()));
        }
        let mut d = 0.0f64;
        for (a, b) in self.mean.iter().zip(other.mean.iter()) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.variance.iter().zip(other.variance.iter()) {
            d = d.max((a - b).abs());
        }
        Ok(d)
    }
}

/// Plain arithmetic mean/variance over the pattern's reduction axes.
pub fn uniform_moments(x: &FieldTensor, pattern: ReductionPattern) -> Result<Moments> {
    let (b, c, n) = (x.batch(), x.channels(), x.num_nodes());
    let slices = pattern.num_slices(c)?;
    let data = x.flat();
    let mut mean = Array2::zeros((b, slices));
    let mut var = Array2::zeros((b, slices));
    for bi in 0..b {
        for s in 0..slices {
            let range = pattern.slice_channels(c, s);
            let count = (range.len() * n) as f64;
            let mut acc = 0.0;
            for ch in range.clone() {
                let row = data.slice(ndarray::s![bi, ch, ..]);
                let row = row.as_slice().expect("contiguous lane");
                acc += pairwise_sum(n, &|i| row[i]);
            }
            let mu = acc / count;
            let mut vacc = 0.0;
            for ch in range {
                let row = data.slice(ndarray::s![bi, ch, ..]);
                let row = row.as_slice().expect("contiguous lane");
                vacc += pairwise_sum(n, &|i| {
                    let d = row[i] - mu;
                    d * d
                });
            }
            mean[(bi, s)] = mu;
            var[(bi, s)] = vacc / count;
        }
    }
    Moments::new(mean, var, pattern, false)
}

/// Quadrature-weighted mean/variance:
/// `mu = sum(w x) / (m sum(w))`, `v = sum(w (x - mu)^2) / (m sum(w))`,
/// with `m` the number of channels pooled into the slice.
pub fn weighted_moments(
    x: &FieldTensor,
    w: &WeightField,
    pattern: ReductionPattern,
) -> Result<Moments> {
    let (b, c, n) = (x.batch(), x.channels(), x.num_nodes());
    if w.grid().spatial_shape() != x.grid().spatial_shape() {
        return Err(Error::ShapeMismatch(format!(
            "weight shape {:?} vs field spatial shape {:?}",
            w.grid().spatial_shape(),
            x.grid().spatial_shape()
        )));
    }
    let slices = pattern.num_slices(c)?;
    let data = x.flat();
    let wflat = w.flat();
    let sum_w = pairwise_sum(n, &|i| wflat[i]);
    let mut mean = Array2::zeros((b, slices));
    let mut var = Array2::zeros((b, slices));
    for bi in 0..b {
        for s in 0..slices {
            let range = pattern.slice_channels(c, s);
            let m = range.len() as f64;
            let denom = m * sum_w;
            let mut acc = 0.0;
            for ch in range.clone() {
                let row = data.slice(ndarray::s![bi, ch, ..]);
                let row = row.as_slice().expect("contiguous lane");
                acc += pairwise_sum(n, &|i| wflat[i] * row[i]);
            }
            let mu = acc / denom;
            let mut vacc = 0.0;
            for ch in range {
                let row = data.slice(ndarray::s![bi, ch, ..]);
                let row = row.as_slice().expect("contiguous lane");
                vacc += pairwise_sum(n, &|i| {
                    let d = row[i] - mu;
                    wflat[i] * d * d
                });
            }
            mean[(bi, s)] = mu;
            var[(bi, s)] = vacc / denom;
        }
    }
    Moments::new(mean, var, pattern, true)
}

/// Blends uniform (LayerNorm-style) and weighted moments:
/// `mu_b = alpha mu_ln + (1-alpha) mu_wln`,
/// `v_b = alpha v_ln + (1-alpha) v_wln + alpha (1-alpha) (mu_ln - mu_wln)^2`.
///
/// The variance formula is the exact second central moment of the mixture
/// weight distribution, so the blend never needs a third pass over the data.
pub fn blend_moments(m_ln: &Moments, m_wln: &Moments, alpha: f64) -> Result<Moments> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0,1], got {alpha}"
        )));
    }
    if m_ln.pattern != m_wln.pattern {
        return Err(Error::InvalidArgument(
            "blend requires matching reduction patterns".into(),
        ));
    }
    if m_ln.mean.dim() != m_wln.mean.dim() {
        return Err(Error::ShapeMismatch(
            "blend requires matching moment shapes".into(),
        ));
    }
    let mut mean = Array2::zeros(m_ln.mean.dim());
    let mut var = Array2::zeros(m_ln.mean.dim());
    for ((idx, mu), out) in m_ln.mean.indexed_iter().zip(mean.iter_mut()) {
        *out = alpha * mu + (1.0 - alpha) * m_wln.mean[idx];
    }
    for ((idx, v), out) in m_ln.variance.indexed_iter().zip(var.iter_mut()) {
        let dmu = m_ln.mean[idx] - m_wln.mean[idx];
        *out = alpha * v + (1.0 - alpha) * m_wln.variance[idx] + alpha * (1.0 - alpha) * dmu * dmu;
    }
    Moments::new(mean, var, m_ln.pattern, true)
}
