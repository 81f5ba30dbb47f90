//! End-to-end tests of the `qnk` command surface: artifact round trips,
//! output headers, and exit codes.

use quadnorm::cli::run;

fn tmpdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn qnk(args: &[&str]) -> i32 {
    let mut argv = vec!["qnk"];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn weights_csv_matches_reference() {
    let dir = tmpdir();
    let out = dir.path().join("w.csv");
    let code = qnk(&[
        "weights",
        "--rule",
        "trapezoid",
        "--n",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "0.25,0.5,0.25"), "got: {text}");
    assert!(text.starts_with("# config "), "config header missing");
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(qnk(&["weights", "--no-such-flag"]), 2);
    assert_eq!(qnk(&["frobnicate"]), 2);
}

#[test]
fn sample_moments_normalize_resample_roundtrip() {
    let dir = tmpdir();
    let field = dir.path().join("f.qnk");
    let normed = dir.path().join("g.qnk");
    let resampled = dir.path().join("h.qnk");
    assert_eq!(
        qnk(&[
            "sample",
            "--field",
            "mixed2d",
            "--n",
            "17,17",
            "--channels",
            "2",
            "--output",
            field.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        qnk(&[
            "normalize",
            "--input",
            field.to_str().unwrap(),
            "--method",
            "quadnorm:layer",
            "--output",
            normed.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        qnk(&[
            "resample",
            "--input",
            normed.to_str().unwrap(),
            "--target-n",
            "33,33",
            "--method",
            "bicubic",
            "--output",
            resampled.to_str().unwrap()
        ]),
        0
    );
    let y = quadnorm::fieldio::read_field_path(&resampled).unwrap();
    assert_eq!(y.grid().spatial_shape(), vec![33, 33]);
    assert_eq!(y.channels(), 2);

    // moments of the normalized field: weighted layer stats are ~(0, 1)
    let out = dir.path().join("m.csv");
    assert_eq!(
        qnk(&[
            "moments",
            "--input",
            normed.to_str().unwrap(),
            "--rule",
            "trapezoid",
            "--pattern",
            "layer",
            "--output",
            out.to_str().unwrap()
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let data_line = text
        .lines()
        .find(|l| l.starts_with("0,0,"))
        .expect("moment row");
    let cells: Vec<f64> = data_line
        .split(',')
        .skip(2)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(cells[0].abs() < 1e-10, "weighted mean {}", cells[0]);
    assert!(
        (cells[1] - 1.0).abs() < 1e-2,
        "weighted variance {}",
        cells[1]
    );
}

#[test]
fn moments_rerun_on_written_artifact_is_identical() {
    let dir = tmpdir();
    let field = dir.path().join("f.qnk");
    qnk(&[
        "sample",
        "--field",
        "exp1d",
        "--n",
        "33",
        "--output",
        field.to_str().unwrap(),
    ]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert_eq!(
            qnk(&[
                "moments",
                "--input",
                field.to_str().unwrap(),
                "--rule",
                "simpson",
                "--output",
                out.to_str().unwrap()
            ]),
            0
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn consistency_summary_line_present() {
    let dir = tmpdir();
    let out = dir.path().join("c.csv");
    assert_eq!(
        qnk(&[
            "consistency",
            "--field",
            "quadratic1d",
            "--rule",
            "uniform",
            "--ladder",
            "17,33,65,129,257",
            "--output",
            out.to_str().unwrap()
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let order_line = text
        .lines()
        .find(|l| l.starts_with("# fitted_order "))
        .expect("summary");
    let order: f64 = order_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((0.8..=1.2).contains(&order), "uniform order {order}");
}

#[test]
fn json_format_carries_config_and_rows() {
    let dir = tmpdir();
    let out = dir.path().join("w.json");
    assert_eq!(
        qnk(&[
            "weights",
            "--rule",
            "simpson",
            "--n",
            "5",
            "--format",
            "json",
            "--output",
            out.to_str().unwrap()
        ]),
        0
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["command"], "weights");
    assert_eq!(v["rows"][0].as_array().unwrap().len(), 5);
}

#[test]
fn incompatible_rule_fails_with_usage_error() {
    let dir = tmpdir();
    let out = dir.path().join("w.csv");
    // Boole needs (n-1) divisible by 4
    let code = qnk(&[
        "weights",
        "--rule",
        "boole",
        "--n",
        "4",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn stats_battery_on_csv_pairs() {
    let dir = tmpdir();
    let base = dir.path().join("base.csv");
    let meth = dir.path().join("meth.csv");
    std::fs::write(&base, "seed,error\n0,2.0\n1,2.0\n2,2.0\n3,2.0\n").unwrap();
    std::fs::write(&meth, "seed,error\n0,1.0\n1,1.0\n2,1.0\n3,1.0\n").unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(
        qnk(&[
            "stats",
            "--baseline",
            base.to_str().unwrap(),
            "--method",
            meth.to_str().unwrap(),
            "--margin",
            "0.5",
            "--resamples",
            "200",
            "--output",
            out.to_str().unwrap()
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("improvement,0.5"), "got {text}");
    assert!(text.contains("# ci_method percentile"));
}

#[test]
fn verify_all_passes_and_writes_csv() {
    let dir = tmpdir();
    let out = dir.path().join("verify.csv");
    let code = qnk(&[
        "verify-all",
        "--seed",
        "7",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let passes = text
        .lines()
        .filter(|l| l.split(',').nth(2) == Some("true"))
        .count();
    assert_eq!(passes, 11, "expected 11 passing criteria:\n{text}");
}

#[test]
fn opsim_gap_columns() {
    let dir = tmpdir();
    let out = dir.path().join("gap.csv");
    assert_eq!(
        qnk(&[
            "opsim",
            "gap",
            "--source-n",
            "9",
            "--targets",
            "17,33",
            "--depth",
            "1",
            "--width",
            "4",
            "--modes",
            "3",
            "--methods",
            "none",
            "--output",
            out.to_str().unwrap()
        ]),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.lines()
            .any(|l| l == "method,L,r,h,h_prime,discrepancy"),
        "got {text}"
    );
    assert!(text.lines().any(|l| l.starts_with("none,1,2.0,")));
}
