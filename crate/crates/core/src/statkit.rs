//! Statistical toolbox for experiment reporting: paired bootstrap
//! improvement CIs, TOST equivalence, Holm-Bonferroni correction, Cohen's d,
//! and paired t-tests.
//!
//! Bootstrap resampling draws per-resample RNG streams derived from the
//! resample index, so results are identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{student_t_quantile, student_t_sf};
use crate::sum::pairwise_sum_slice;

/// Observations paired by seed: `a` is the baseline, `b` the method.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSamples {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "paired samples need equal lengths, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::InvalidArgument("paired samples need n >= 2".into()));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn baseline(&self) -> &[f64] {
        &self.a
    }

    pub fn method(&self) -> &[f64] {
        &self.b
    }

    fn differences(&self) -> Vec<f64> {
        self.b.iter().zip(&self.a).map(|(b, a)| b - a).collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum_slice(xs) / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator).
fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    ss / (xs.len() - 1) as f64
}

/// Linear-interpolated empirical quantile of a sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    let pos = p * (m - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Paired bootstrap percentile CI for the improvement
/// `1 - mean(method)/mean(baseline)`.
///
/// Returns `(improvement, lo, hi)`. Every baseline value must be positive.
pub fn bootstrap_improvement_ci(
    s: &PairedSamples,
    resamples: usize,
    confidence: f64,
    rng_seed: u64,
) -> Result<(f64, f64, f64)> {
    if s.a.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidArgument(
            "bootstrap improvement needs strictly positive baseline values".into(),
        ));
    }
    if confidence <= 0.0 || confidence >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "confidence must be in (0,1), got {confidence}"
        )));
    }
    if resamples < 1 {
        return Err(Error::InvalidArgument("resamples must be >= 1".into()));
    }
    let n = s.len();
    let point = 1.0 - mean(&s.b) / mean(&s.a);
    // index-derived RNG streams keep the resample sequence independent of
    // the thread count
    let mut stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(k as u64 + 1);
            let mut sa = 0.0;
            let mut sb = 0.0;
            for _ in 0..n {
                let idx = rng.random_range(0..n);
                sa += s.a[idx];
                sb += s.b[idx];
            }
            1.0 - sb / sa
        })
        .collect();
    stats.sort_by(|x, y| x.partial_cmp(y).expect("bootstrap statistics are finite"));
    let tail = (1.0 - confidence) / 2.0;
    Ok((
        point,
        quantile_sorted(&stats, tail),
        quantile_sorted(&stats, 1.0 - tail),
    ))
}

/// TOST equivalence result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TostResult {
    /// max of the two one-sided p-values
    pub p_value: f64,
    pub equivalent: bool,
    /// mean(method - baseline)
    pub mean_diff: f64,
    /// 90% CI of the difference
    pub ci90: (f64, f64),
}

/// Two one-sided paired t-tests against `+-margin`. Equivalence is declared
/// when both one-sided nulls are rejected at 0.05, i.e. the max p-value is
/// below 0.05. Zero-variance differences degrade to the exact comparison of
/// `|mean_diff|` against the margin.
pub fn tost_equivalence(s: &PairedSamples, margin: f64) -> Result<TostResult> {
    if margin <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "margin must be > 0, got {margin}"
        )));
    }
    let d = s.differences();
    let n = d.len();
    let md = mean(&d);
    let var = sample_variance(&d);
    if var == 0.0 {
        let inside = md.abs() < margin;
        return Ok(TostResult {
            p_value: if inside { 0.0 } else { 1.0 },
            equivalent: inside,
            mean_diff: md,
            ci90: (md, md),
        });
    }
    let se = (var / n as f64).sqrt();
    let df = (n - 1) as f64;
    // H01: mu <= -margin, rejected for large (md + margin)/se
    let t_lower = (md + margin) / se;
    let p_lower = student_t_sf(t_lower, df);
    // H02: mu >= +margin, rejected for small (md - margin)/se
    let t_upper = (md - margin) / se;
    let p_upper = 1.0 - student_t_sf(t_upper, df);
    let p = p_lower.max(p_upper);
    let tcrit = student_t_quantile(0.95, df);
    Ok(TostResult {
        p_value: p,
        equivalent: p < 0.05,
        mean_diff: md,
        ci90: (md - tcrit * se, md + tcrit * se),
    })
}

/// Holm-Bonferroni step-down: sorts the p-values ascending, compares the
/// i-th smallest against `alpha / (m - i)` (0-based), and stops at the first
/// failure. Returns rejection flags in the original order.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0,1], got {alpha}"
        )));
    }
    for p in p_values {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::InvalidArgument(format!("p-value {p} outside [0,1]")));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        p_values[i]
            .partial_cmp(&p_values[j])
            .expect("p-values are finite")
    });
    let mut reject = vec![false; m];
    for (rank, &idx) in order.iter().enumerate() {
        let threshold = alpha / (m - rank) as f64;
        if p_values[idx] < threshold {
            reject[idx] = true;
        } else {
            break;
        }
    }
    Ok(reject)
}

/// Cohen's d with the equal-n pooled standard deviation from unbiased
/// per-group variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohensD {
    pub d: f64,
    /// Set when the pooled standard deviation is zero; `d` is then a signed
    /// infinity sentinel (or 0 for identical means).
    pub degenerate: bool,
}

pub fn cohens_d(s: &PairedSamples) -> Result<CohensD> {
    let pooled = ((sample_variance(&s.a) + sample_variance(&s.b)) / 2.0).sqrt();
    let diff = mean(&s.a) - mean(&s.b);
    if pooled == 0.0 {
        let d = if diff == 0.0 {
            0.0
        } else if diff > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        return Ok(CohensD {
            d,
            degenerate: true,
        });
    }
    Ok(CohensD {
        d: diff / pooled,
        degenerate: false,
    })
}

/// Paired t-test on `a - b`: returns `(t, two-sided p)`. Zero-variance
/// differences take the exact-equality fast path (p = 1 for all-zero
/// differences, +-infinity t and p = 0 otherwise).
pub fn paired_t_test(s: &PairedSamples) -> Result<(f64, f64)> {
    let d: Vec<f64> = s.a.iter().zip(&s.b).map(|(a, b)| a - b).collect();
    let n = d.len();
    let md = mean(&d);
    let var = sample_variance(&d);
    if var == 0.0 {
        return if md == 0.0 {
            Ok((0.0, 1.0))
        } else {
            Ok((
                if md > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                },
                0.0,
            ))
        };
    }
    let t = md / (var / n as f64).sqrt();
    let p = 2.0 * student_t_sf(t.abs(), (n - 1) as f64);
    Ok((t, p.min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn bootstrap_degenerate_and_null_cases() {
        let s = PairedSamples::new(vec![2.0, 2.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap();
        let (imp, lo, hi) = bootstrap_improvement_ci(&s, 1000, 0.95, 0).unwrap();
        assert_eq!((imp, lo, hi), (0.5, 0.5, 0.5));

        let v = vec![3.0, 2.5, 2.0, 3.5];
        let s = PairedSamples::new(v.clone(), v).unwrap();
        let (imp, lo, hi) = bootstrap_improvement_ci(&s, 1000, 0.95, 1).unwrap();
        assert_eq!(imp, 0.0);
        assert!(lo <= 0.0 && hi >= 0.0);
    }

    #[test]
    fn bootstrap_rejects_nonpositive_baseline() {
        let s = PairedSamples::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(bootstrap_improvement_ci(&s, 100, 0.95, 0).is_err());
    }

    #[test]
    fn bootstrap_is_thread_invariant() {
        let s = PairedSamples::new(
            vec![10.2, 9.8, 10.5, 9.9, 10.1, 10.3],
            vec![8.1, 8.3, 7.9, 8.2, 8.0, 8.4],
        )
        .unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| bootstrap_improvement_ci(&s, 4000, 0.95, 7).unwrap())
        };
        let a = run(1);
        let b = run(8);
        assert_eq!(a, b);
    }

    #[test]
    fn bootstrap_coverage_monte_carlo() {
        // CI should cover the true improvement in >= 90% of meta-trials.
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let noise_a = Normal::new(0.0, 0.6).unwrap();
        let noise_b = Normal::new(0.0, 0.5).unwrap();
        let truth = 1.0 - 8.0 / 10.0;
        let trials = 200u64;
        let mut covered = 0u64;
        for t in 0..trials {
            let n = 20;
            let a: Vec<f64> = (0..n).map(|_| 10.0 + noise_a.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..n).map(|_| 8.0 + noise_b.sample(&mut rng)).collect();
            let s = PairedSamples::new(a, b).unwrap();
            let (_, lo, hi) = bootstrap_improvement_ci(&s, 2000, 0.95, 1000 + t).unwrap();
            if lo <= truth && truth <= hi {
                covered += 1;
            }
        }
        assert!(covered * 10 >= trials * 9, "coverage {covered}/{trials}");
    }

    #[test]
    fn tost_basic_cases() {
        let v = vec![1.0, 1.2, 0.9, 1.1];
        let s = PairedSamples::new(v.clone(), v).unwrap();
        let r = tost_equivalence(&s, 0.5).unwrap();
        assert!(r.equivalent);
        assert_eq!(r.mean_diff, 0.0);

        // mean difference at twice the margin with tiny variance
        let a = vec![1.0, 1.0001, 0.9999, 1.0];
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        let s = PairedSamples::new(a, b).unwrap();
        let r = tost_equivalence(&s, 0.5).unwrap();
        assert!(!r.equivalent);
        assert!(r.p_value > 0.5);
    }

    #[test]
    fn tost_margin_limits() {
        let a = vec![1.0, 1.5, 0.5, 1.2, 0.8];
        let b = vec![1.1, 1.4, 0.7, 1.0, 0.9];
        let s = PairedSamples::new(a, b).unwrap();
        let wide = tost_equivalence(&s, 1e9).unwrap();
        assert!(wide.equivalent);
        let narrow = tost_equivalence(&s, 1e-12).unwrap();
        assert!(!narrow.equivalent);
    }

    #[test]
    fn tost_zero_variance_exact_path() {
        let a = vec![1.0, 1.0, 1.0];
        let b = vec![1.1, 1.1, 1.1];
        let s = PairedSamples::new(a, b).unwrap();
        let r = tost_equivalence(&s, 0.5).unwrap();
        assert!(r.equivalent);
        assert_abs_diff_eq!(r.mean_diff, 0.1, epsilon = 1e-15);
        let r = tost_equivalence(&s, 0.05).unwrap();
        assert!(!r.equivalent);
    }

    #[test]
    fn tost_reference_shape() {
        // n = 10 paired values with mean difference 0.0024 and a small
        // spread; margin 0.5 must give overwhelming equivalence.
        let z = [-1.5, -1.0, -0.5, -0.25, 0.0, 0.0, 0.25, 0.5, 1.0, 1.5];
        let sd = 0.006;
        let a = vec![2.0944; 10];
        let b: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(i, z)| a[i] + 0.0024 + sd * z)
            .collect();
        let s = PairedSamples::new(a, b).unwrap();
        let r = tost_equivalence(&s, 0.5).unwrap();
        assert!(r.equivalent);
        assert!(r.p_value < 1e-4, "p = {}", r.p_value);
        assert_abs_diff_eq!(r.mean_diff, 0.0024, epsilon = 1e-12);
    }

    #[test]
    fn holm_textbook_cases() {
        let r = holm_bonferroni(&[0.01, 0.04], 0.05).unwrap();
        assert_eq!(r, vec![true, true]);
        let r = holm_bonferroni(&[0.03, 0.04], 0.05).unwrap();
        assert_eq!(r, vec![false, false]);
        let r = holm_bonferroni(&[0.0, 0.0, 0.0], 0.05).unwrap();
        assert_eq!(r, vec![true, true, true]);
        assert!(holm_bonferroni(&[1.2], 0.05).is_err());
    }

    #[test]
    fn holm_is_monotone() {
        // rejecting at p implies rejecting any smaller p in the same family
        let ps = [0.001, 0.012, 0.02, 0.04, 0.3];
        let r = holm_bonferroni(&ps, 0.05).unwrap();
        let mut seen_accept = false;
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&i, &j| ps[i].partial_cmp(&ps[j]).unwrap());
        for idx in order {
            if !r[idx] {
                seen_accept = true;
            } else {
                assert!(
                    !seen_accept,
                    "rejection after an acceptance in sorted order"
                );
            }
        }
    }

    #[test]
    fn cohens_d_cases() {
        let v = vec![1.0, 2.0, 3.0];
        let s = PairedSamples::new(v.clone(), v).unwrap();
        let r = cohens_d(&s).unwrap();
        assert_eq!(r.d, 0.0);
        assert!(!r.degenerate);

        let s = PairedSamples::new(vec![3.0; 4], vec![1.0; 4]).unwrap();
        let r = cohens_d(&s).unwrap();
        assert!(r.degenerate);
        assert!(r.d.is_infinite() && r.d > 0.0);
    }

    #[test]
    fn cohens_d_monte_carlo() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let n = 10_000;
        let na = Normal::new(1.0, 1.0).unwrap();
        let nb = Normal::new(0.0, 1.0).unwrap();
        let a: Vec<f64> = (0..n).map(|_| na.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| nb.sample(&mut rng)).collect();
        let s = PairedSamples::new(a, b).unwrap();
        let r = cohens_d(&s).unwrap();
        assert!((r.d - 1.0).abs() < 0.05, "d = {}", r.d);
    }

    #[test]
    fn paired_t_cases() {
        let v = vec![0.3, 0.7, 0.1, 0.9];
        let s = PairedSamples::new(v.clone(), v).unwrap();
        let (t, p) = paired_t_test(&s).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p, 1.0);

        let s = PairedSamples::new(vec![2.0; 4], vec![1.0; 4]).unwrap();
        let (t, p) = paired_t_test(&s).unwrap();
        assert!(t.is_infinite() && t > 0.0);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn paired_t_reference_value() {
        // 10 differences with exact mean 1 and exact sample sd 1 give
        // t = sqrt(10) and two-sided p ~ 0.0115.
        let base = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.0, 0.5, 1.0, 2.0, 3.0];
        let ss: f64 = base.iter().map(|z| z * z).sum();
        let scale = ((ss / 9.0) as f64).sqrt();
        let a: Vec<f64> = base.iter().map(|z| 1.0 + z / scale).collect();
        let b = vec![0.0; 10];
        let s = PairedSamples::new(a, b).unwrap();
        let (t, p) = paired_t_test(&s).unwrap();
        assert_abs_diff_eq!(t, 10.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(p, 0.011507985165943651, epsilon = 1e-9);
    }
}
