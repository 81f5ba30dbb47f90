//! Transfer-scaling integration checks on the frozen stack: intercept
//! ordering across methods and depth growth with no normalization.

use quadnorm::grid::FieldId;
use quadnorm::normalize::{NormMethod, QuadMode};
use quadnorm::opsim::{depth_scaling_experiment, gap_scaling_experiment, StackSpec};

#[test]
fn layernorm_intercept_exceeds_quadnorm() {
    let template = StackSpec::new(4, 16, 6, 2, 7);
    let report = gap_scaling_experiment(
        &template,
        &[NormMethod::LayerNorm, NormMethod::QuadNorm(QuadMode::Layer)],
        &FieldId::Mixed2d,
        17,
        &[33, 65, 129, 257],
    )
    .unwrap();
    let intercept = |m: &str| {
        report
            .fits
            .iter()
            .find(|f| f.method == m)
            .map(|f| f.intercept)
            .expect("fit present")
    };
    let ratio = intercept("layernorm") / intercept("quadnorm:layer");
    assert!(ratio > 1.0, "intercept ratio {ratio}");
}

#[test]
fn unnormalized_depth_growth_at_most_linear() {
    // The transfer bound is linear in L; without a normalization layer the
    // measured growth exponent must stay at or below that.
    let template = StackSpec::new(4, 16, 6, 2, 7);
    let report = depth_scaling_experiment(
        &template,
        &[NormMethod::None],
        &[1, 2, 4, 8],
        &FieldId::Mixed2d,
        17,
        129,
    )
    .unwrap();
    let fit = report.fits.first().expect("none fit");
    assert!(fit.slope <= 1.2, "norm=none growth exponent {}", fit.slope);
    for row in &report.rows {
        assert!(row.discrepancy.is_finite() && row.discrepancy > 0.0);
    }
}
