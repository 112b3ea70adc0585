"""Jet algebra, differential polynomials, and operator identification."""

import numpy as np
import pytest

from abelops.jets import Jet
from abelops.operators import (
    BakerBasis,
    DiffPoly,
    OperatorError,
    baker_eval,
    baker_x_deriv,
    baker_x_jet,
    const_field,
    diffpoly_right_divide,
    heat_operator,
    magnetic_multiplier,
    magnetic_translate,
    reconstruct_operator,
    spectral_value,
    theta_field,
    vw_fields,
)
from abelops.verify import DEFAULT_BLOCH_C, default_cprime


def test_jet_exp_log_roundtrip():
    j = Jet.linear(0.3 + 0.1j, 0.2 - 0.05j, -0.4 + 0.2j, 4)
    back = j.exp().log()
    assert np.max(np.abs(back.c - j.c)) < 1e-12


def test_jet_product_matches_polynomial_product():
    a = Jet.linear(1.0, 2.0, 0.0, 3)
    b = Jet.linear(3.0, 0.0, -1.0, 3)
    p = a * b
    # (1 + 2 x1)(3 - x2) = 3 + 6 x1 - x2 - 2 x1 x2
    assert p.c[0, 0] == pytest.approx(3.0)
    assert p.c[1, 0] == pytest.approx(6.0)
    assert p.c[0, 1] == pytest.approx(-1.0)
    assert p.c[1, 1] == pytest.approx(-2.0)


def test_jet_reciprocal_inverts():
    j = Jet.linear(2.0 + 0.3j, -0.4, 0.7j, 4)
    one = j * j.reciprocal()
    target = Jet.constant(1.0, 4)
    assert np.max(np.abs((one - target).c)) < 1e-12


def test_jet_exp_derivative_rule():
    j = Jet.linear(0.2, 0.5, -0.3, 5)
    e = j.exp()
    # d/dx1 exp(j) = j_x1 exp(j), compare jets after truncation
    lhs = e.deriv(1, 0)
    rhs = e * 0.5
    for i in range(5):
        for j in range(5 - i):
            assert abs(lhs.c[i, j] - rhs.c[i, j]) < 1e-12


def test_theta_field_matches_derivative_table(cc):
    shift = np.array([0.11 + 0.02j, -0.07 + 0.04j])
    f = theta_field(cc, shift)
    x = np.array([0.05, -0.03], dtype=complex)
    jet = f(x, 2)
    for d in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1)):
        ref = cc.th(shift + x, d)
        assert abs(jet.deriv_value(*d) - ref) < 1e-10 * (1 + abs(ref))


def test_field_quotient_rule(cc):
    f = theta_field(cc, np.array([0.3, 0.1], dtype=complex))
    g = theta_field(cc, np.array([-0.2, 0.25], dtype=complex))
    q = f / g
    x = np.array([0.04, 0.02], dtype=complex)
    fx, gx = f.value(x), g.value(x)
    dfx = f.deriv(1, 0).value(x)
    dgx = g.deriv(1, 0).value(x)
    ref = (dfx * gx - fx * dgx) / gx**2
    assert abs(q.deriv(1, 0).value(x) - ref) < 1e-9 * (1 + abs(ref))


def test_basis_jet_matches_contour_derivatives(bundle):
    z = np.array([0.31 + 0.12j, -0.22 + 0.08j])
    x = np.array([0.06, -0.04], dtype=complex)
    jet = baker_x_jet(bundle.basis, 1, z, x, 2)
    for d in ((1, 0), (0, 1), (2, 0)):
        ref = baker_x_deriv(bundle.basis, 1, z, x, d)
        assert abs(jet.deriv_value(*d) - ref) < 1e-6 * (1 + abs(ref))


def test_basis_rejects_unknown_kind(cc):
    with pytest.raises(OperatorError):
        BakerBasis(cc=cc, kind="nonsense", c=np.array([0.1, 0.2], dtype=complex))


def test_eigenrelation_second_order_spot(bundle):
    cc = bundle.cc
    z = np.array([0.27 + 0.09j, 0.34 - 0.06j])
    x = np.array([0.08, 0.05], dtype=complex)
    psi = np.array([baker_eval(bundle.basis, w, z, x) for w in (1, 2)])
    lv = spectral_value(cc, (1, 1), z)
    lhs = bundle.L.apply(bundle.basis, z, x)
    assert np.linalg.norm(lhs - lv * psi) < 1e-8 * (abs(lv) * np.linalg.norm(psi) + 1)


def test_eigenrelation_third_order_spot(bundle):
    cc = bundle.cc
    z = np.array([0.27 + 0.09j, 0.34 - 0.06j])
    x = np.array([0.08, 0.05], dtype=complex)
    psi = np.array([baker_eval(bundle.basis, w, z, x) for w in (1, 2)])
    lv = spectral_value(cc, (1, 2), z)
    lhs = bundle.L1.apply(bundle.basis, z, x)
    assert np.linalg.norm(lhs - lv * psi) < 1e-8 * (abs(lv) * np.linalg.norm(psi) + 1)


def test_diffpoly_compose_associative(cc):
    f = theta_field(cc, np.array([0.22, 0.31], dtype=complex))
    g = theta_field(cc, np.array([-0.15, 0.18], dtype=complex))
    A = DiffPoly({(1, 0): f, (0, 0): 0.7})
    B = DiffPoly({(0, 1): g, (1, 0): 1.3})
    C = DiffPoly({(0, 0): f * g, (0, 1): -0.5})
    x = np.array([0.03, -0.02], dtype=complex)
    left = (A.compose(B)).compose(C).eval_coeffs(x)
    right = A.compose(B.compose(C)).eval_coeffs(x)
    for k in set(left) | set(right):
        assert abs(left.get(k, 0.0) - right.get(k, 0.0)) < 1e-8 * (
            1 + abs(left.get(k, 0.0))
        )


def test_diffpoly_commutator_of_coordinate_pair(cc):
    # [d1, x1-like field] = derivative of the field: order drops by one
    f = theta_field(cc, np.array([0.2, 0.1], dtype=complex))
    D1 = DiffPoly({(1, 0): 1.0})
    M = DiffPoly({(0, 0): f})
    comm = D1.commutator(M)
    x = np.array([0.07, 0.01], dtype=complex)
    vals = comm.eval_coeffs(x)
    ref = f.deriv(1, 0).value(x)
    assert abs(vals[(0, 0)] - ref) < 1e-10 * (1 + abs(ref))
    assert abs(vals.get((1, 0), 0.0)) < 1e-10 * (1 + abs(ref))


def test_right_division_exact(bundle):
    cc = bundle.cc
    U = theta_field(cc, np.array([0.21, 0.13], dtype=complex))
    H = heat_operator(bundle.table.ops, U)
    f = theta_field(cc, np.array([-0.1, 0.3], dtype=complex))
    A = DiffPoly({(4, 0): f, (2, 1): 0.8, (1, 0): f * f, (0, 0): 1.1})
    Q, R = diffpoly_right_divide(A, H)
    assert all(k[0] <= 1 for k in R.terms)
    x = np.array([0.02, -0.05], dtype=complex)
    recon = (Q.compose(H) + R).eval_coeffs(x)
    ref = A.eval_coeffs(x)
    for k in set(recon) | set(ref):
        assert abs(recon.get(k, 0.0) - ref.get(k, 0.0)) < 1e-8 * (
            1 + abs(ref.get(k, 0.0))
        )


def test_right_division_requires_normalized_head(bundle):
    H = DiffPoly({(2, 0): -2.0, (0, 1): 1.0})
    with pytest.raises(OperatorError):
        diffpoly_right_divide(DiffPoly({(2, 0): 1.0}), H)


def test_reconstruction_matches_closed_form(bundle):
    x = np.array([0.09, 0.06], dtype=complex)
    rows = reconstruct_operator(bundle.basis, (1, 1), x, seed=5)
    assert rows[0].residual < 1e-8 and rows[1].residual < 1e-8
    for key in ((2, 0), (0, 1)):
        got = rows[0].coeffs[((0, 0), key)]
        ref = bundle.L.entries[0][0].coeff(key).value(x)
        assert abs(got - ref) < 1e-7 * (1 + abs(ref))


def test_off_diagonal_coefficient_matches_field(bundle):
    V, W = vw_fields(bundle.cc, bundle.table.exp, bundle.c)
    x = np.array([0.09, 0.06], dtype=complex)
    rows = reconstruct_operator(bundle.basis, (1, 1), x, seed=5)
    got = rows[0].coeffs[((0, 1), (0, 0))]
    ref = W.value(x)
    assert abs(got - ref) < 1e-7 * (1 + abs(ref))


def test_vw_product_is_twist_free(bundle):
    cc = bundle.cc
    V, W = vw_fields(cc, bundle.table.exp, bundle.c)
    K, c = cc.rc.K, bundle.c
    pref = 2.0 * cc.th(K, (2, 0)) / cc.th(cc.rc.K3)
    x = np.array([0.04, -0.08], dtype=complex)
    ref = (
        pref**2
        * cc.th(c - 3.0 * K + x)
        * cc.th(c + K + x)
        / cc.th(c - K + x) ** 2
    )
    got = V.value(x) * W.value(x)
    assert abs(got - ref) < 1e-9 * (1 + abs(ref))


def test_magnetic_translation_eigenfunction(cc):
    cprime = default_cprime(cc.periods.Omega)
    basis = BakerBasis(
        cc=cc, kind="section2_twisted",
        c=np.asarray(DEFAULT_BLOCH_C, dtype=complex), cprime=cprime,
    )
    z = np.array([0.24 + 0.11j, -0.31 + 0.05j])
    x = np.array([0.03, 0.07], dtype=complex)
    for j in (1, 2):
        mu = magnetic_multiplier(basis, j, z)
        for w in (1, 2):
            lhs = magnetic_translate(
                j, lambda xx: baker_eval(basis, w, z, xx), x, cc.periods.Omega
            )
            rhs = mu * baker_eval(basis, w, z, x)
            assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))


def test_constant_field_derivatives_vanish():
    f = const_field(2.5 - 1.0j)
    x = np.array([0.3, 0.4], dtype=complex)
    assert f.value(x) == 2.5 - 1.0j
    assert f.deriv(1, 0).value(x) == 0.0
