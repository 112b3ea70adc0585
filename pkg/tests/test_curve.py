"""Curve, quadrature, and period-matrix tests."""

import numpy as np
import pytest

from abelops.curve import (
    CurveError,
    abel_map,
    abel_map_raw,
    lattice_residual,
    make_curve,
    named_cycles,
    omega2_zeros,
    period_data,
    segment_du,
)

BRANCH = [0.0, 1.0, 2.0, 3.0, 4.0]


def test_make_curve_rejects_unordered():
    with pytest.raises(CurveError):
        make_curve([1.0, 0.0, 2.0, 3.0, 4.0])


def test_make_curve_rejects_wrong_count():
    with pytest.raises(CurveError):
        make_curve([0.0, 1.0, 2.0])


def test_sqrt_branch_positive_above_cuts():
    curve = make_curve(BRANCH)
    # above the last branch point the polynomial is positive
    assert abs(curve.w_up(5.0) - np.sqrt(curve.poly(5.0).real)) < 1e-12


def test_sqrt_branch_vanishes_at_branch_points():
    curve = make_curve(BRANCH)
    for y in BRANCH:
        assert abs(curve.w_up(y)) == 0.0


def test_period_matrix_symmetric(cc):
    Om = cc.periods.Omega
    assert np.max(np.abs(Om - Om.T)) < 1e-10


def test_period_matrix_purely_imaginary(cc):
    assert np.max(np.abs(cc.periods.Omega.real)) < 1e-9


def test_period_matrix_imaginary_part_positive_definite(cc):
    assert np.linalg.eigvalsh(cc.periods.Omega.imag)[0] > 0


def test_normalization_inverts_a_periods(cc):
    res = cc.periods.Cmat @ cc.periods.Amat - np.eye(2)
    assert np.max(np.abs(res)) < 1e-10


def test_period_quadrature_stability():
    curve = make_curve(BRANCH)
    loose = period_data(curve, tol=1e-9).Omega
    tight = period_data(curve, tol=1e-12).Omega
    assert np.max(np.abs(loose - tight)) < 1e-9


def test_segment_integral_additivity():
    curve = make_curve(BRANCH)
    whole = segment_du(curve, 1, 0.25, 0.75)
    parts = segment_du(curve, 1, 0.25, 0.5) + segment_du(curve, 1, 0.5, 0.75)
    assert abs(whole - parts) < 1e-10 * (1 + abs(whole))


def test_cycle_intersection_pairing():
    curve = make_curve(BRANCH)
    cycles = named_cycles(curve)
    assert {"a1", "a2", "b1", "b2"} <= set(cycles)


def test_abel_image_of_last_branch_point(cc):
    # the farthest finite branch point maps to the half period (1/2, 1/2)
    img = abel_map_raw(cc.curve, cc.periods, cc.curve.point(4.0, 0))
    res = lattice_residual(cc.periods.Omega, img - np.array([0.5, 0.5]))
    assert res < 1e-10


def test_abel_map_involution_antisymmetry(cc):
    # base point at infinity is fixed by the sheet swap
    up = abel_map_raw(cc.curve, cc.periods, cc.curve.point(4.5, 0))
    dn = abel_map_raw(cc.curve, cc.periods, cc.curve.point(4.5, 1))
    assert np.max(np.abs(up + dn)) < 1e-10


def test_abel_map_reduced_form(cc):
    pt, raw = abel_map(cc.curve, cc.periods, cc.curve.point(2.5, 0))
    assert lattice_residual(cc.periods.Omega, raw - pt.raw(cc.periods.Omega)) < 1e-10


def test_omega2_zero_pair(cc):
    R, Q = omega2_zeros(cc.curve, cc.periods)
    assert abs(R.y - Q.y) < 1e-12
    assert R.sheet != Q.sheet
    # the zero sits inside the spectrum for this branch configuration
    assert BRANCH[0] < R.y.real < BRANCH[-1]
