"""Theta evaluation, quasi-periodicity, derivatives, tori, and roots."""

import math

import numpy as np
import pytest

from abelops.theta import (
    DivisorProximityError,
    TORUS_SHIFTS,
    TorusSpec,
    brute_force_theta,
    divisor_solve,
    log_theta_deriv,
    theta_eval,
    theta_value,
    torus_grid,
    torus_point,
)

TWO_PI_I = 2j * math.pi


def _random_z(rng, n):
    return rng.normal(size=(n, 2)) * 0.5 + 1j * rng.normal(size=(n, 2)) * 0.3


def test_quasi_periodicity_law(cc, rng):
    """theta(z + Omega m + n) = theta(z) exp(-pi i <Omega m, m> - 2 pi i <m, z>)."""
    Om = cc.periods.Omega
    worst = 0.0
    for z in _random_z(rng, 100):
        m = rng.integers(-2, 3, size=2)
        n = rng.integers(-2, 3, size=2)
        lhs = cc.th(z + Om @ m + n)
        factor = np.exp(-1j * math.pi * (m @ Om @ m) - TWO_PI_I * (m @ z))
        rhs = cc.th(z) * factor
        worst = max(worst, abs(lhs - rhs) / (abs(rhs) + 1e-30))
    assert worst < 1e-10


def test_parity(cc, rng):
    worst = 0.0
    for z in _random_z(rng, 50):
        worst = max(worst, abs(cc.th(z) - cc.th(-z)) / (1 + abs(cc.th(z))))
        # odd first derivatives
        worst = max(
            worst, abs(cc.th(z, (1, 0)) + cc.th(-z, (1, 0))) / (1 + abs(cc.th(z, (1, 0))))
        )
    assert worst < 1e-10


def test_brute_force_agreement(cc, rng):
    worst = 0.0
    for z in _random_z(rng, 20):
        ref = brute_force_theta(cc.periods.Omega, z)
        worst = max(worst, abs(cc.th(z) - ref) / (1 + abs(ref)))
    assert worst < 1e-11


def test_brute_force_derivative_agreement(cc, rng):
    worst = 0.0
    for z in _random_z(rng, 5):
        for d in ((1, 0), (0, 1), (2, 0), (1, 1)):
            ref = brute_force_theta(cc.periods.Omega, z, d=d)
            worst = max(worst, abs(cc.th(z, d) - ref) / (1 + abs(ref)))
    assert worst < 1e-11


def test_deriv_table_consistency(cc):
    z = np.array([0.21 + 0.05j, -0.33 + 0.11j])
    tab = cc.ctx.deriv_table(z, 3)
    for d in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)):
        assert abs(tab[d] - theta_eval(cc.ctx, z, d=d)[0]) < 1e-10 * (
            1 + abs(tab[d])
        )


def test_large_imaginary_argument_stable(cc):
    # reduction must prevent overflow while preserving quasi-periodicity
    Om = cc.periods.Omega
    z = np.array([0.3, 0.4]) + Om @ np.array([6, -7])
    v = cc.th(z)
    assert np.isfinite(v.real) and np.isfinite(v.imag)
    factor = np.exp(
        -1j * math.pi * (np.array([6, -7]) @ Om @ np.array([6, -7]))
        - TWO_PI_I * (np.array([6, -7]) @ np.array([0.3, 0.4]))
    )
    ref = cc.th(np.array([0.3, 0.4])) * factor
    assert abs(v - ref) / abs(ref) < 1e-9


def test_log_derivative_matches_quotients(cc):
    z = np.array([0.17 + 0.08j, 0.42 - 0.06j])
    t = cc.th(z)
    assert abs(log_theta_deriv(cc.ctx, z, (1, 0)) - cc.th(z, (1, 0)) / t) < 1e-10
    d2 = cc.th(z, (2, 0)) / t - (cc.th(z, (1, 0)) / t) ** 2
    assert abs(log_theta_deriv(cc.ctx, z, (2, 0)) - d2) < 1e-9


def test_log_derivative_guard(cc):
    with pytest.raises(DivisorProximityError):
        log_theta_deriv(cc.ctx, cc.rc.K, (1, 0))


def test_torus_points_real_values(cc):
    for idx in (1, 2, 3, 4):
        for t1, t2 in ((0.1, 0.7), (0.45, 0.2)):
            pt = torus_point(cc.ctx, TorusSpec(index=idx, t1=t1, t2=t2))
            z = 1j * np.array([t1, t2]) + TORUS_SHIFTS[idx]
            v = cc.th(z)
            assert abs(v.imag) < 1e-10 * (1 + abs(v))
            assert pt.z.shape == (2,)


def test_torus_grid_shapes(cc):
    T1, T2, V = torus_grid(cc.ctx, 1, 12, window=0.8)
    assert T1.shape == T2.shape == V.shape == (12, 12)
    assert abs(V[0, 0] - cc.th(TORUS_SHIFTS[1] + 0j)) < 1e-12 * (1 + abs(V[0, 0]))


def test_divisor_solve_on_torus_line(cc):
    # the fourth torus carries theta zeros; find one along a parameter line
    def path(t):
        return 1j * np.array([t, 0.44]) + TORUS_SHIFTS[4]

    t_star = divisor_solve(cc.ctx, path, (0.0, 1.0))
    assert abs(cc.th(path(t_star))) < 1e-9


def test_theta_value_shortcut(cc):
    z = np.array([0.3 + 0.02j, -0.1 + 0.05j])
    assert theta_value(cc.ctx, z) == cc.th(z)
