"""Verification harness: result invariants, slices, special points, reports."""

import json

import numpy as np
import pytest

from abelops.verify import (
    SliceSpec,
    VerifyError,
    config_hash,
    default_cprime,
    emit_report,
    run_all,
    special_points,
)


def test_check_results_pass_iff_below_tolerance(all_results):
    for r in all_results:
        assert r.passed == (r.residual < r.tolerance), r.name


def test_slice_points_shapes():
    spec = SliceSpec(kind="real_x", grid=4, window=0.3)
    pts = spec.points()
    assert pts.shape == (16, 2)
    assert np.max(np.abs(pts.imag)) == 0.0


def test_slice_imaginary_shifted_structure():
    spec = SliceSpec(kind="imaginary_shifted", grid=3, window=0.2)
    pts = spec.points()
    # real part is the constant half-integer shift on this slice
    assert np.max(np.abs(pts.real - 0.5)) < 1e-14


def test_slice_unknown_kind_raises():
    with pytest.raises(VerifyError):
        SliceSpec(kind="bogus", grid=3, window=0.2)
    with pytest.raises(VerifyError):
        SliceSpec(kind="real_x", grid=1, window=0.2)


def test_special_points_on_divisor(cc):
    sp = special_points(cc, grid=40)
    scale = abs(cc.th(np.zeros(2)))
    for p in (sp.p1, sp.p2, sp.p3):
        assert abs(cc.th(p.raw(cc.periods.Omega))) < 1e-6 * scale
    # intersection points also lie on the translated divisor
    cp = default_cprime(cc.periods.Omega)
    for p in (sp.p1, sp.p2):
        assert abs(cc.th(p.raw(cc.periods.Omega) - cp)) < 1e-6 * scale
    # the nonvanishing witness stays well away from the divisor
    assert abs(cc.th(sp.p4.raw(cc.periods.Omega))) > 1e-3


def test_run_all_names_unique(all_results):
    names = [r.name for r in all_results]
    assert len(names) == len(set(names))
    assert len(names) >= 20


def test_run_all_contains_both_regimes(results_by_name):
    assert any(n.startswith("theorem1_") for n in results_by_name)
    assert any(n.startswith("theorem2_") for n in results_by_name)
    assert "pair_commutator" in results_by_name
    assert "trisecant_specialization" in results_by_name


def test_run_all_rejects_unknown_regime(cc):
    with pytest.raises(VerifyError):
        run_all(cc, regime="theorem3")


def test_tolerance_scale_applies(cc):
    res = run_all(cc, regime="theorem2", grid=3, tol_scale=10.0)
    base = run_all(cc, regime="theorem2", grid=3, tol_scale=1.0)
    by = {r.name: r for r in base}
    for r in res:
        assert r.tolerance == pytest.approx(10.0 * by[r.name].tolerance)


def test_report_deterministic(all_results):
    cfg = {"branch": [0, 1, 2, 3, 4], "seed": 42}
    a = emit_report(all_results, cfg)
    b = emit_report(all_results, cfg)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_report_counts_and_hash(all_results):
    cfg = {"branch": [0, 1, 2, 3, 4], "seed": 42}
    report = emit_report(all_results, cfg)
    assert report["n_checks"] == len(all_results)
    assert report["n_passed"] == sum(r.passed for r in all_results)
    assert report["overall"] == (report["n_passed"] == report["n_checks"])
    assert report["config_hash"] == config_hash(cfg)
    assert len(report["config_hash"]) == 16


def test_config_hash_sensitive_to_content():
    a = config_hash({"branch": [0, 1, 2, 3, 4]})
    b = config_hash({"branch": [0, 1, 2, 3, 5]})
    assert a != b
    assert config_hash({"x": 1, "y": 2}) == config_hash({"y": 2, "x": 1})


def test_all_residuals_finite(all_results):
    for r in all_results:
        assert np.isfinite(r.residual), r.name
        assert r.tolerance > 0 or r.name == "self_commutator", r.name
