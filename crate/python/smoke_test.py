#!/usr/bin/env python3
"""Smoke test for the quadnorm_py extension module.

Builds nothing itself: it locates the compiled cdylib under ../target
(release preferred) and imports it directly. Build first with

    cargo build --release -p quadnorm-py
"""

import math
import pathlib
import shutil
import sys
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libquadnorm_py.so",
        root / "target" / "debug" / "libquadnorm_py.so",
        root / "target" / "release" / "quadnorm_py.dll",
        root / "target" / "debug" / "quadnorm_py.dll",
        root / "target" / "release" / "libquadnorm_py.dylib",
        root / "target" / "debug" / "libquadnorm_py.dylib",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("quadnorm_py cdylib not found; run `cargo build -p quadnorm-py` first")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="quadnorm_py_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, stage / f"quadnorm_py{suffix}")
    sys.path.insert(0, str(stage))
    import quadnorm_py

    return quadnorm_py


def approx(a, b, tol=1e-12):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    qn = load_module()

    # trapezoid weights on three endpoint-inclusive nodes
    g3 = qn.Grid.uniform([3])
    w, shape = qn.weights(g3, "trapezoid")
    assert shape == [3]
    assert w == [0.25, 0.5, 0.25]

    # control volumes on a custom mesh
    g = qn.Grid.custom([0.0, 0.1, 0.5, 1.0])
    w, _ = qn.weights(g, "auto")
    approx(w[0], 0.05)
    approx(sum(w), 1.0)

    # weighted vs uniform moments of x^2 samples
    f = qn.sample_field("quadratic1d", g3)
    means_w, _ = qn.moments(f, pattern="layer", rule="trapezoid")
    approx(means_w[0], 0.375)
    means_u, _ = qn.moments(f, pattern="layer", rule="uniform")
    approx(means_u[0], 5.0 / 12.0)

    # the exact endpoint identity at m = 3 on x^2: both sides are 1/24
    lhs, rhs = qn.first_order_identity([0.0, 0.25, 1.0])
    approx(lhs, 1.0 / 24.0)
    approx(rhs, 1.0 / 24.0)

    # quadrature collapses to uniform statistics on periodic grids
    gp = qn.Grid.periodic([8, 8])
    fp = qn.sample_field("periodic2d", gp)
    assert qn.periodic_collapse_check(fp, "layer") <= 1e-14

    # blend endpoints: alpha = 1 matches layernorm output exactly
    g2 = qn.Grid.uniform([9, 9])
    f2 = qn.sample_field("mixed2d", g2, 2)
    ln = qn.normalize_forward(f2, "layernorm")
    b1 = qn.normalize_forward(f2, "blendquadnorm:1.0")
    diff = max(abs(a - b) for a, b in zip(ln.values(), b1.values()))
    assert diff <= 1e-14, diff

    # statistic-mismatch orders: trapezoid ~2, uniform ~1
    ladder = [(17, 33), (33, 65), (65, 129)]
    pts_trap = []
    pts_unif = []
    for n, np_ in ladder:
        h = 1.0 / (n - 1)
        pts_trap.append((h, qn.statistic_mismatch("quadratic1d", n, np_, 1, "trapezoid")[0]))
        pts_unif.append((h, qn.statistic_mismatch("quadratic1d", n, np_, 1, "uniform")[0]))
    assert 1.75 <= qn.order_estimate(pts_trap) <= 2.25
    assert 0.8 <= qn.order_estimate(pts_unif) <= 1.2

    # bicubic resampling preserves constants exactly
    c = qn.sample_field("constant:5", qn.Grid.uniform([5, 5]))
    up = qn.interpolate(c, qn.Grid.uniform([9, 9]), "bicubic")
    assert all(abs(v - 5.0) <= 1e-14 for v in up.values())

    # mesh bias: control volumes beat uniform averaging on a skewed mesh
    r = qn.bias_report("bump2d", "boundary-refined", 3.0, 64)
    assert r["reduction_factor"] >= 100.0, r

    # frozen-stack transfer discrepancy is finite and per-layer consistent
    disc, per_layer = qn.transfer_discrepancy(
        "mixed2d", "quadnorm:layer", 17, 33, depth=2, width=8, modes=4, seed=7
    )
    assert math.isfinite(disc)
    approx(per_layer[-1], disc, 1e-12)

    # statistics toolbox
    flags = qn.holm_bonferroni([0.01, 0.04], 0.05)
    assert flags == [True, True]
    imp, lo, hi = qn.bootstrap_improvement_ci([2.0, 2.0, 2.0], [1.0, 1.0, 1.0], 500, 0.95, 0)
    assert (imp, lo, hi) == (0.5, 0.5, 0.5)
    t, p = qn.paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert p == 1.0
    r = qn.tost_equivalence([1.0, 1.1, 0.9, 1.0], [1.0, 1.1, 0.9, 1.0], 0.5)
    assert r["equivalent"]

    print("quadnorm_py smoke test: OK")


if __name__ == "__main__":
    main()
