"""Riemann constants and the scalar constants entering the operator formulas.

Computes the vector of Riemann constants in both base-point conventions, the
two constants of the degenerate trisecant identity

    d^2/dz_1^2 log theta(z) = c3 + c2 theta(z-2K) theta(z+2K) / theta(z)^2,

the local-expansion constants a, b, d, e, alpha, beta, gamma, a2 read off
the embedded surfaces G1 = {theta(z+2K)=0} and G2 = {theta(z-2K)=0}, and the
derived operator constants c1..c8.

A fixed literal representative of K is used throughout: theta and its
derivatives are never evaluated at a re-reduced multiple of K, so all
identities relating values at K, 2K, 3K hold without quasi-periodicity
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .curve import (
    Curve,
    CurveError,
    CurvePoint,
    PeriodData,
    JacobianPoint,
    abel_map_raw,
    make_curve,
    omega2_zeros,
    period_data,
)
from .theta import ThetaContext, theta_eval, log_theta_deriv


class ConstantsError(Exception):
    """Failure while computing a derived constant."""


@dataclass(frozen=True)
class RiemannConstants:
    """K in both base conventions plus its small multiples (raw vectors)."""

    K: np.ndarray
    K_inf: np.ndarray
    K_red: JacobianPoint
    Kinf_red: JacobianPoint
    #: candidates from the half-lattice search that met the vanishing tests
    accepted: int = 1

    @property
    def K2(self):
        return 2.0 * self.K

    @property
    def K3(self):
        return 3.0 * self.K


@dataclass(frozen=True)
class FayConstants:
    c2: complex
    c3: complex


@dataclass(frozen=True)
class ExpansionConstants:
    a: complex
    b: complex
    d: complex
    e: complex
    alpha: complex
    beta: complex
    gamma: complex
    a2: complex


@dataclass(frozen=True)
class OperatorConstants:
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    c5: complex
    c6: complex
    c7: complex
    c8: complex


@dataclass(frozen=True)
class CurveContext:
    """Bundle of everything downstream code needs about one curve."""

    curve: Curve
    periods: PeriodData
    ctx: ThetaContext
    R: CurvePoint
    Q: CurvePoint
    rc: RiemannConstants

    def th(self, z, d=(0, 0)) -> complex:
        return theta_eval(self.ctx, np.asarray(z, dtype=complex), d=d)[0]


def _reduce_point(Omega, z_raw) -> JacobianPoint:
    Omega = np.asarray(Omega, dtype=complex)
    v = np.linalg.solve(Omega.imag, np.asarray(z_raw).imag)
    m = np.floor(v + 1e-12).astype(int)
    z1 = np.asarray(z_raw) - Omega @ m
    n = np.floor(z1.real - Omega.real @ (v - m) + 1e-12).astype(int)
    return JacobianPoint(z=z1 - n, m=m, n=n)


def riemann_constants(
    curve: Curve,
    periods: PeriodData,
    ctx: ThetaContext,
    vanish_tol: float = 1e-8,
    deriv_tol: float = 1e-7,
) -> RiemannConstants:
    """Select K from the half-lattice candidates solving 2K = -int_Q^R omega.

    The congruence determines K up to 2-torsion only; the wanted K is the
    representative at which both theta and theta_1 vanish.  The search is
    exhaustive over the 16 shifts and an ambiguous outcome is an error.
    """
    Omega = periods.Omega
    R, Q = omega2_zeros(curve, periods)
    A_R = abel_map_raw(curve, periods, R)
    # base point is fixed by the hyperelliptic involution, so A(Q) = -A(R)
    # and int_Q^R omega = 2 A(R); thus K = -A(R) up to half-lattice shift
    base = -A_R
    scale = abs(theta_eval(ctx, np.zeros(2))[0])
    hits = []
    for m1, m2, n1, n2 in iproduct((0, 1), repeat=4):
        cand = base + 0.5 * (Omega @ np.array([m1, m2]) + np.array([n1, n2]))
        t0 = abs(theta_eval(ctx, cand)[0])
        if t0 > vanish_tol * scale:
            continue
        t1 = abs(theta_eval(ctx, cand, d=(1, 0))[0])
        if t1 > deriv_tol * scale:
            continue
        hits.append((cand, t0, t1))
    if not hits:
        raise ConstantsError(
            "K selection failed: no half-lattice candidate has both "
            "theta(K) and theta_1(K) vanishing"
        )
    if len(hits) > 1:
        raise ConstantsError(
            f"K selection ambiguous: {len(hits)} candidates pass the "
            "vanishing tests"
        )
    # balanced lattice representative: lattice coordinates in [-1/2, 1/2).
    # All downstream formulas use this one literal vector (and its small
    # multiples), which keeps theta magnitudes moderate at K, 2K and 3K.
    K = hits[0][0]
    v = np.linalg.solve(Omega.imag, K.imag)
    K = K - Omega @ np.rint(v)
    K = K - np.rint(K.real - Omega.real @ (v - np.rint(v)))
    K_inf = np.array(
        [
            0.5 * (Omega[0, 0] + Omega[0, 1]) + 1.0,
            0.5 * (Omega[1, 0] + Omega[1, 1]) + 0.5,
        ]
    )
    return RiemannConstants(
        K=K,
        K_inf=K_inf,
        K_red=_reduce_point(Omega, K),
        Kinf_red=_reduce_point(Omega, K_inf),
        accepted=len(hits),
    )


def curve_context(branch_or_curve, theta_tol: float = 1e-14) -> CurveContext:
    curve = (
        branch_or_curve
        if isinstance(branch_or_curve, Curve)
        else make_curve(branch_or_curve)
    )
    periods = period_data(curve)
    ctx = ThetaContext(periods.Omega, tol=theta_tol)
    rc = riemann_constants(curve, periods, ctx)
    R, Q = omega2_zeros(curve, periods)
    return CurveContext(curve=curve, periods=periods, ctx=ctx, R=R, Q=Q, rc=rc)


# ----------------------------------------------------------------------
# Fay constants


def fay_constants(cc: CurveContext) -> FayConstants:
    K = cc.rc.K
    K3 = cc.rc.K3
    t3 = cc.th(K3)
    if abs(t3) < 1e-10:
        raise ConstantsError("theta(3K) vanishes; Fay constants undefined")
    c2 = -cc.th(K, (2, 0)) / t3
    c3 = cc.th(K3, (2, 0)) / t3 - (cc.th(K3, (1, 0)) / t3) ** 2
    return FayConstants(c2=complex(c2), c3=complex(c3))


def fay_residual(cc: CurveContext, fay: FayConstants, z) -> float:
    """Relative residual of the trisecant specialization at one point."""
    z = np.asarray(z, dtype=complex)
    lhs = log_theta_deriv(cc.ctx, z, (2, 0))
    t = cc.th(z)
    rhs = fay.c3 + fay.c2 * cc.th(z - cc.rc.K2) * cc.th(z + cc.rc.K2) / t**2
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def fay_refit(cc: CurveContext, n_samples: int = 50, seed: int = 0) -> FayConstants:
    """Independent least-squares recovery of (c2, c3) from random samples.

    Shifting the 2K representative by a lattice vector multiplies the theta
    quotient by a z-independent constant, so the fit runs with the reduced
    representative (quotient of order one, well conditioned) and c2 is
    converted back to the raw-representative convention afterwards.
    """
    rng = np.random.default_rng(seed)
    K2_red = _reduce_point(cc.periods.Omega, cc.rc.K2).z

    def quot(z, K2):
        t = cc.th(z)
        return cc.th(z - K2) * cc.th(z + K2) / t**2

    rows, rhs = [], []
    zs = []
    while len(zs) < n_samples:
        z = rng.normal(size=2) * 0.4 + 1j * rng.normal(size=2) * 0.2
        if abs(cc.th(z)) < 0.05:
            continue
        zs.append(z)
        rows.append([quot(z, K2_red), 1.0])
        rhs.append(log_theta_deriv(cc.ctx, z, (2, 0)))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    ratio = quot(zs[0], cc.rc.K2) / rows[0][0]
    return FayConstants(c2=complex(sol[0] / ratio), c3=complex(sol[1]))


# ----------------------------------------------------------------------
# expansion constants on the embedded surfaces


def gamma_point(cc: CurveContext, which: int, s: complex) -> np.ndarray:
    """Raw point of G1 (which=1) or G2 (which=2) at curve parameter s.

    G1 is parametrized by A1(P) = int_Q^P omega - K; G2 by -A1(P).  The
    geometric parameter s = y - y0 moves P away from Q along its sheet, so
    s -> 0 lands exactly on the literal -K (resp. +K) representative.
    Complex s is allowed: the normalized differentials are integrated along
    the straight segment from y0 to y0 + s, which stays inside the disk
    where the sheet is single valued as long as |s| is smaller than the
    distance from y0 to the nearest branch point.
    """
    y0 = float(cc.Q.y.real)
    sgn = -1.0 if cc.Q.sheet == 1 else 1.0
    xg, wg = np.polynomial.legendre.leggauss(24)
    y = y0 + 0.5 * (xg + 1.0) * s
    wv = sgn * cc.curve.w_up(y)
    integ = (cc.periods.Cmat @ np.vstack([np.ones_like(y), y])) / wv
    z = -cc.rc.K + (integ * wg).sum(axis=1) * (0.5 * s)
    return z if which == 1 else -z


# truncated power series utilities (coefficient arrays, index = power)

_SERIES_LEN = 14


def _smul(a, b):
    return np.convolve(a, b)[:_SERIES_LEN]


def _sdiv(a, b):
    """Series quotient a/b, b[0] != 0."""
    M = _SERIES_LEN
    out = np.zeros(M, complex)
    r = np.concatenate([np.asarray(a, complex), np.zeros(M)])[:M]
    bb = np.concatenate([np.asarray(b, complex), np.zeros(M)])[:M]
    for k in range(M):
        out[k] = r[k] / bb[0]
        r[k:M] -= out[k] * bb[: M - k]
    return out


def _scomp(a, q):
    """Series composition a(q(s)) with q[0] = 0, by Horner's scheme."""
    out = np.zeros(_SERIES_LEN, complex)
    for c in a[::-1]:
        out = _smul(out, q)
        out[0] += c
    return out


def _srev(a):
    """Inverse series of a, with a[0] = 0 and a[1] != 0."""
    b = np.zeros(_SERIES_LEN, complex)
    b[1] = 1.0 / a[1]
    for k in range(2, _SERIES_LEN):
        b[k] = -_scomp(a, b)[k] / a[1]
    return b


def _gamma_series(cc: CurveContext, which: int, radius: float, n_nodes: int = 64):
    """Laurent data of the theta quotients along G1 or G2 near -+K.

    Samples the surface on a circle of the given radius in the geometric
    parameter, recovers Taylor coefficients in s by the discrete Fourier
    transform, then converts everything to series in the local parameter
    u = theta_1(z) by series reversion.  The circle keeps theta away from
    its double zero, so every coefficient comes out near machine precision
    (real-axis sampling loses half the digits to cancellation).
    """
    N = n_nodes
    s = radius * np.exp(2j * np.pi * np.arange(N) / N)
    Z = np.array([gamma_point(cc, which, si) for si in s])
    derivs = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]
    C = {}
    for d in derivs:
        vals = np.array([cc.th(z, d) for z in Z])
        C[d] = (np.fft.fft(vals) / N)[:_SERIES_LEN] / radius ** np.arange(_SERIES_LEN)
    if abs(C[(0, 0)][0]) > 1e-8 * abs(C[(0, 0)][2]) or abs(C[(1, 0)][0]) > 1e-8 * abs(
        C[(1, 0)][1]
    ):
        raise ConstantsError(
            "surface parametrization does not hit the expansion point: "
            "theta or theta_1 fails to vanish at s = 0"
        )
    u = C[(1, 0)].copy()
    u[0] = 0.0
    s_of_u = _srev(u)
    sigma = np.concatenate([s_of_u[1:], [0.0]])  # s(u)/u
    sig2 = _smul(sigma, sigma)
    that = np.concatenate([C[(0, 0)][2:], [0.0, 0.0]])  # theta(z(s)) / s^2

    def pole2(d):
        """u-series P with  theta_d/theta = P(u) / u^2."""
        return _sdiv(_scomp(_sdiv(C[d], that), s_of_u), sig2)

    return {
        "pole2": pole2,
        "u_series": lambda d: _scomp(C[d], s_of_u),
    }


def expansion_constants(
    cc: CurveContext,
    radius: float = 0.15,
    stability_tol: float = 1e-9,
) -> ExpansionConstants:
    """Constants of the local expansions at -K on G1.

    Every constant is extracted twice, at the given sampling radius and at
    0.6 times it; disagreement beyond stability_tol (relative) is an error.
    """

    def run(r):
        ser = _gamma_series(cc, 1, r)
        p2 = ser["pole2"]((0, 1))  # theta_2/theta: gamma + beta u + alpha u^2
        p12 = ser["pole2"]((1, 1))  # theta_12/theta: a2 + a u + ...
        p1 = ser["pole2"]((1, 0))  # theta_1/theta: 0 + theta_11(K) u + d u^2 + e u^3
        t2u = ser["u_series"]((0, 1))  # theta_2(-K) + b u + ...
        t11u = ser["u_series"]((2, 0))  # theta_11(-K) + d u + ...
        return {
            "a": p12[1],
            "b": t2u[1],
            "d": t11u[1],
            "e": p1[3],
            "alpha": p2[2],
            "beta": p2[1],
            "gamma": p2[0],
            "a2": p12[0],
        }

    full = run(radius)
    again = run(0.6 * radius)
    for name, v in full.items():
        dv = abs(v - again[name]) / (1.0 + abs(v))
        if dv > stability_tol:
            raise ConstantsError(
                f"unstable expansion series for {name}: relative drift {dv:.3e} "
                f"between radii {radius:g} and {0.6 * radius:g}"
            )
    return ExpansionConstants(**{k: complex(v) for k, v in full.items()})


def expansion_constants_gamma2(cc: CurveContext, radius: float = 0.15):
    """The (b, d, a) triple recomputed on G2; parity predicts (b, -d, -a)."""
    ser = _gamma_series(cc, 2, radius)
    t2u = ser["u_series"]((0, 1))
    t11u = ser["u_series"]((2, 0))
    p12 = ser["pole2"]((1, 1))
    return complex(t2u[1]), complex(t11u[1]), complex(p12[1])


# ----------------------------------------------------------------------
# operator constants


def operator_constants(
    cc: CurveContext, fay: FayConstants, exp: ExpansionConstants
) -> OperatorConstants:
    K, K3 = cc.rc.K, cc.rc.K3
    t2K = cc.th(K, (0, 1))
    if abs(t2K) < 1e-10:
        raise ConstantsError("theta_2(K) vanishes; operator constants undefined")
    t11K = cc.th(K, (2, 0))
    t12K = cc.th(K, (1, 1))
    b, d, a, e, alpha = exp.b, exp.d, exp.a, exp.e, exp.alpha
    c1 = t11K / t2K
    c4 = 1.5 * b * c1 + 1.5 * d + log_theta_deriv(cc.ctx, K3, (1, 0))
    c5 = log_theta_deriv(cc.ctx, K3, (0, 1))
    c6 = 0.5 * b * c1 + 0.5 * d + t12K / t2K
    c7 = -c5 * c6 + log_theta_deriv(cc.ctx, K3, (1, 1))
    c8 = (
        2.0 * d * t12K / t2K
        - 2.0 * b * t11K * t12K / t2K**2
        - 2.0 * a / t2K
        - (0.5 * d - 0.5 * b * t11K / t2K) ** 2
        - 2.0 * t11K * e
        - (t11K / t2K) * alpha
        - fay.c3
    )
    return OperatorConstants(
        c1=complex(c1),
        c2=fay.c2,
        c3=fay.c3,
        c4=complex(c4),
        c5=complex(c5),
        c6=complex(c6),
        c7=complex(c7),
        c8=complex(c8),
    )


@dataclass(frozen=True)
class ConstantsTable:
    rc: RiemannConstants
    fay: FayConstants
    exp: ExpansionConstants
    ops: OperatorConstants


def constants_table(cc: CurveContext) -> ConstantsTable:
    fay = fay_constants(cc)
    exp = expansion_constants(cc)
    ops = operator_constants(cc, fay, exp)
    return ConstantsTable(rc=cc.rc, fay=fay, exp=exp, ops=ops)


def _c2l(z):
    z = complex(z)
    return [z.real, z.imag]


def table_to_json(table: ConstantsTable) -> dict:
    doc = {
        "K": [_c2l(v) for v in table.rc.K],
        "K_inf": [_c2l(v) for v in table.rc.K_inf],
    }
    for j in range(1, 9):
        doc[f"c{j}"] = _c2l(getattr(table.ops, f"c{j}"))
    for name in ("a", "b", "d", "e", "alpha", "beta", "gamma", "a2"):
        doc[name] = _c2l(getattr(table.exp, name))
    return doc
