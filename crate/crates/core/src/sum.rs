//! Deterministic pairwise summation.
//!
//! All statistics reductions go through this fixed-tree accumulator so that
//! results are identical run to run and independent of thread count.

/// Sum `f(0) + ... + f(n-1)` with a fixed binary-tree split (base blocks of
/// 64 summed sequentially).
pub fn pairwise_sum(n: usize, f: &impl Fn(usize) -> f64) -> f64 {
    pairwise_range(0, n, f)
}

fn pairwise_range(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
    let len = hi - lo;
    if len <= 64 {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_range(lo, mid, f) + pairwise_range(mid, hi, f)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum_slice(xs: &[f64]) -> f64 {
    pairwise_sum(xs.len(), &|i| xs[i])
}
