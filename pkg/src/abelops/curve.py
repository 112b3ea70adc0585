"""Genus-2 hyperelliptic curve w^2 = P(y) with five real branch points.

Implements the cut system ([y1,y2], [y3,y4], [y5,inf)), the named cycle basis
of the standard real picture (a1, a2, b1, b2 plus the involution cycles
C1..C3 and B1..B3), abelian integrals with endpoint-singularity-removing
substitutions, the period matrix, the Abel map with base point at infinity,
and the two involutions sigma, tau.

All integration is carried out along the real axis approached from the upper
half-plane; the branch of w there is

    w_up(y) = exp(1/2 * sum_j Log(y - y_j)),   Im y = +0,

so that w_up is real positive to the right of y5.  Sheet 0 of a point with
real y means w = w_up(y), sheet 1 means w = -w_up(y).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class CurveError(Exception):
    """Invalid curve data or integration request."""


class QuadratureError(CurveError):
    """Quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class JacobianPoint:
    """Point of the Jacobian C^2/(Z^2 + Omega Z^2) with its lattice record.

    ``z`` is the fundamental-domain representative; the original vector is
    ``raw = z + Omega m + n`` (Omega supplied by the reducing context).
    """

    z: np.ndarray
    m: np.ndarray
    n: np.ndarray

    def raw(self, Omega) -> np.ndarray:
        return self.z + np.asarray(Omega) @ self.m + self.n


@dataclass(frozen=True)
class Curve:
    """w^2 = P(y) = (y-y1)...(y-y5) with real y1 < ... < y5."""

    branch: tuple[float, float, float, float, float]

    @property
    def cuts(self):
        y = self.branch
        return ((y[0], y[1]), (y[2], y[3]), (y[4], math.inf))

    @property
    def gaps(self):
        y = self.branch
        return ((-math.inf, y[0]), (y[1], y[2]), (y[3], y[4]))

    def poly(self, y):
        out = 1.0 + 0.0j
        for b in self.branch:
            out = out * (y - b)
        return out

    def w_up(self, y):
        """Branch of sqrt(P) on the upper side of the real axis."""
        y = np.asarray(y, dtype=complex)
        y = np.where(y.imag == 0, y + 0j, y)  # keep +0 imaginary part
        acc = np.zeros_like(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            for b in self.branch:
                acc = acc + np.log(y - b + 0j)
            out = np.exp(0.5 * acc)
        # at a branch point the log is -inf and the product is exactly zero
        return np.where(np.isnan(out), 0.0, out)

    def point(self, y: float, sheet: int) -> "CurvePoint":
        w = complex(self.w_up(y))
        if sheet == 1:
            w = -w
        return CurvePoint(y=complex(y), sheet=sheet, w=w, curve=self)


@dataclass(frozen=True)
class CurvePoint:
    """Point (y, w) on the curve with a sheet tag relative to w_up."""

    y: complex
    sheet: int
    w: complex
    curve: Curve

    def __post_init__(self):
        p = self.curve.poly(self.y)
        if abs(self.w**2 - p) > 1e-12 * (1.0 + abs(p)):
            raise CurveError("w^2 != P(y) for curve point")


@dataclass(frozen=True)
class Cycle:
    """Named cycle as an ordered list of (y_start, y_end, sheet) segments."""

    label: str
    segments: tuple[tuple[float, float, int], ...]


#: intersection indices of the canonical basis, encoded combinatorially
INTERSECTIONS = {
    ("a1", "b1"): 1,
    ("a2", "b2"): 1,
    ("a1", "b2"): 0,
    ("a2", "b1"): 0,
    ("a1", "a2"): 0,
    ("b1", "b2"): 0,
}


def intersection_index(label1: str, label2: str) -> int:
    if (label1, label2) in INTERSECTIONS:
        return INTERSECTIONS[(label1, label2)]
    if (label2, label1) in INTERSECTIONS:
        return -INTERSECTIONS[(label2, label1)]
    raise KeyError(f"unknown cycle pair {label1}, {label2}")


def named_cycles(curve: Curve) -> dict[str, Cycle]:
    """The nine named cycles of the standard picture, as segment lists.

    a1, a2 run around the first two cuts (out on the upper sheet, back on the
    lower); b1 crosses cuts 1 and 3, b2 crosses cuts 2 and 3.  C1..C3 loop
    around the three cuts (fixed by tau), B1..B3 cross the three gaps (fixed
    by sigma tau); a1 = C1 and a2 = C2.
    """
    y1, y2, y3, y4, y5 = curve.branch
    inf = math.inf

    def loop(a, b):
        return ((a, b, 0), (b, a, 1))  # out along the top, back on the lower sheet

    def cross(a, b):
        return ((a, b, 0), (b, a, 1))  # upper sheet out, lower sheet back

    return {
        "a1": Cycle("a1", loop(y1, y2)),
        "a2": Cycle("a2", loop(y3, y4)),
        "b1": Cycle("b1", cross(y2, y5)),
        "b2": Cycle("b2", cross(y4, y5)),
        "C1": Cycle("C1", loop(y1, y2)),
        "C2": Cycle("C2", loop(y3, y4)),
        "C3": Cycle("C3", loop(y5, inf)),
        "B1": Cycle("B1", cross(-inf, y1)),
        "B2": Cycle("B2", cross(y2, y3)),
        "B3": Cycle("B3", cross(y4, y5)),
    }


def make_curve(branch) -> Curve:
    """Validate branch points and build the curve with its canonical cuts."""
    b = [float(x) for x in branch]
    if len(b) != 5:
        raise CurveError("exactly five branch points required")
    if any(not math.isfinite(x) for x in b):
        raise CurveError("branch points must be finite")
    for i in range(4):
        if b[i + 1] == b[i]:
            raise CurveError(
                f"coincident branch points: y{i + 1} = y{i + 2} = {b[i]}"
            )
        if b[i + 1] < b[i]:
            raise CurveError(
                f"non-increasing branch points: y{i + 1} = {b[i]} >= y{i + 2} = {b[i + 1]}"
            )
    scale = max(b) - min(b)
    min_gap = min(b[i + 1] - b[i] for i in range(4))
    if min_gap < 1e-6 * scale:
        warnings.warn(
            "nearly coincident branch points: periods may be ill-conditioned",
            RuntimeWarning,
        )
    return Curve(branch=tuple(b))


# ----------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=16)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _is_branch(curve: Curve, y: float, tol: float = 1e-12) -> bool:
    return any(abs(y - b) <= tol * (1.0 + abs(b)) for b in curve.branch)


def _w_reduced(curve: Curve, y, skip):
    """w_up with the factors for branch points in `skip` removed."""
    y = np.asarray(y, dtype=complex)
    y = np.where(y.imag == 0, y + 0j, y)
    acc = np.zeros_like(y)
    for b in curve.branch:
        if any(abs(b - s) <= 1e-12 * (1.0 + abs(s)) for s in skip):
            continue
        acc = acc + np.log(y - b + 0j)
    return np.exp(0.5 * acc)


def _converge(sampler, tol: float, n0: int = 64, max_doublings: int = 6):
    prev = sampler(n0)
    n = n0
    for _ in range(max_doublings):
        n *= 2
        cur = sampler(n)
        if abs(cur - prev) < tol:
            return cur, abs(cur - prev)
        prev = cur
    raise QuadratureError(
        f"quadrature did not converge below {tol:g} at {n} nodes "
        f"(last correction {abs(cur - prev):.3e})"
    )


def segment_du(curve: Curve, i: int, a: float, b: float, tol: float = 1e-11) -> complex:
    """Integral of du_i = y^(i-1) dy / w along [a, b] on the upper side.

    Endpoints may be branch points (inverse-square-root singularities are
    removed by substitution); interior branch points are an error.  b may be
    +inf, in which case the tail substitution y = a' + tan^2(phi) is used.
    """
    if i not in (1, 2):
        raise CurveError("differential index must be 1 or 2")
    for bp in curve.branch:
        if a + 1e-12 < bp < b - 1e-12:
            raise CurveError(f"path [{a}, {b}] passes through branch point {bp}")

    if math.isinf(b):
        sing = _is_branch(curve, a)

        def sampler(n):
            x, wts = _gl_nodes(n)
            phi = (x + 1.0) * (math.pi / 4.0)
            jac = math.pi / 4.0
            t = np.tan(phi)
            y = a + t * t
            sec2 = 1.0 + t * t
            if sing:
                rest = _w_reduced(curve, y, (a,))
                vals = 2.0 * sec2 * y ** (i - 1) / rest
            else:
                wv = curve.w_up(y)
                vals = 2.0 * t * sec2 * y ** (i - 1) / wv
            return complex(np.sum(wts * jac * vals))

        val, _ = _converge(sampler, tol)
        return val

    if math.isinf(a):
        sing = _is_branch(curve, b)

        def sampler(n):
            x, wts = _gl_nodes(n)
            phi = (x + 1.0) * (math.pi / 4.0)
            jac = math.pi / 4.0
            t = np.tan(phi)
            y = b - t * t
            sec2 = 1.0 + t * t
            if sing:
                # upper-side value of the (y-b) factor is i*t
                rest = _w_reduced(curve, y, (b,))
                vals = 2.0 * sec2 * y ** (i - 1) / (1j * rest)
            else:
                wv = curve.w_up(y)
                vals = 2.0 * t * sec2 * y ** (i - 1) / wv
            return complex(np.sum(wts * jac * vals))

        val, _ = _converge(sampler, tol)
        return val

    if not b > a:
        raise CurveError("segment must have a < b")
    sing_a = _is_branch(curve, a)
    sing_b = _is_branch(curve, b)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)

    if sing_a and sing_b:

        def sampler(n):
            x, wts = _gl_nodes(n)
            phi = x * (math.pi / 2.0)
            jac = math.pi / 2.0
            y = mid + half * np.sin(phi)
            rest = _w_reduced(curve, y, (a, b))
            # w = rest * sqrt(y-a) * i*sqrt(b-y) = rest * i * half * cos(phi)
            vals = y ** (i - 1) / (1j * rest)
            return complex(np.sum(wts * jac * vals))

    elif sing_a:

        def sampler(n):
            x, wts = _gl_nodes(n)
            u = 0.5 * (x + 1.0)
            jac = 0.5
            y = a + (b - a) * u * u
            rest = _w_reduced(curve, y, (a,))
            vals = 2.0 * math.sqrt(b - a) * y ** (i - 1) / rest
            return complex(np.sum(wts * jac * vals))

    elif sing_b:

        def sampler(n):
            x, wts = _gl_nodes(n)
            u = 0.5 * (x + 1.0)
            jac = 0.5
            y = b - (b - a) * u * u
            rest = _w_reduced(curve, y, (b,))
            # factor (y-b): upper-side value is i*sqrt(b-y) = i*sqrt(b-a)*u
            vals = 2.0 * math.sqrt(b - a) * y ** (i - 1) / (1j * rest)
            return complex(np.sum(wts * jac * vals))

    else:

        def sampler(n):
            x, wts = _gl_nodes(n)
            y = mid + half * x
            wv = curve.w_up(y)
            vals = half * y ** (i - 1) / wv
            return complex(np.sum(wts * vals))

    val, _ = _converge(sampler, tol)
    return val


def path_integral(curve: Curve, i: int, segments, tol: float = 1e-11) -> complex:
    """Integral of du_i along an open path of (y_start, y_end, sheet) segments.

    Segments run along the real axis on the upper side; sheet 1 negates w.
    Orientation is the sign of (y_end - y_start).  Closed named cycles should
    use cycle_period, which handles the lower-strand branch bookkeeping.
    """
    total = 0.0 + 0.0j
    prev_end = None
    for (ya, yb, sheet) in segments:
        if prev_end is not None and not _same_y(prev_end, ya):
            raise CurveError("path segments do not join up")
        prev_end = yb
        sgn = 1.0
        a, b = ya, yb
        if (not math.isinf(a) and not math.isinf(b) and b < a) or (
            math.isinf(b) and b < 0
        ) or (math.isinf(a) and a > 0):
            a, b, sgn = (yb, ya, -1.0)
        val = segment_du(curve, i, a, b, tol)
        if sheet == 1:
            val = -val
        total += sgn * val
    return total


def _same_y(a, b):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= 1e-9 * (1.0 + abs(a))


def cycle_period(curve: Curve, i: int, label: str, tol: float = 1e-11) -> complex:
    """Integral of du_i around a named cycle.

    Loops around a cut pick up twice the upper-side cut integral (the lower
    strand contributes with both a sheet flip and the analytic continuation
    sign, which cancel over a cut).  Crossing cycles b1, b2, B1..B3 pick up
    twice the enclosed gap integrals; cut portions of their support cancel
    between the two strands.
    """
    y1, y2, y3, y4, y5 = curve.branch
    inf = math.inf
    two = {
        "a1": ((y1, y2),),
        "C1": ((y1, y2),),
        "a2": ((y3, y4),),
        "C2": ((y3, y4),),
        "C3": ((y5, inf),),
        "b1": ((y2, y3), (y4, y5)),
        "b2": ((y4, y5),),
        "B1": ((-inf, y1),),
        "B2": ((y2, y3),),
        "B3": ((y4, y5),),
    }
    if label not in two:
        raise CurveError(f"unknown cycle label {label!r}")
    return 2.0 * sum(segment_du(curve, i, a, b, tol) for a, b in two[label])


def abelian_integral(curve, i, path, normalized=False, periods=None, tol=1e-11):
    """Integral of du_i (or the normalized omega_i) along a path.

    `path` is either a cycle label from named_cycles or an explicit segment
    list as accepted by path_integral.  Normalization requires PeriodData.
    """
    if normalized and periods is None:
        raise CurveError("normalized integrals need PeriodData")
    labels = [i] if not normalized else [1, 2]
    vals = {}
    for k in labels:
        if isinstance(path, str):
            vals[k] = cycle_period(curve, k, path, tol)
        else:
            vals[k] = path_integral(curve, k, path, tol)
    if not normalized:
        return vals[i]
    return sum(periods.Cmat[i - 1, j] * vals[j + 1] for j in range(2))


# ----------------------------------------------------------------------
# periods


@dataclass(frozen=True)
class PeriodData:
    """Unnormalized periods, normalization, and the period matrix."""

    Amat: np.ndarray  # Amat[i-1, j-1] = loop integral of du_i over a_j
    Bmat: np.ndarray  # same over b_j
    Cmat: np.ndarray  # omega_i = sum_j Cmat[i-1, j-1] du_j
    Omega: np.ndarray


def period_data(curve: Curve, tol: float = 1e-11) -> PeriodData:
    """Period matrix of the canonical cycle basis.

    a_j loops enclose the finite cuts; b_1 crosses cuts 1 and 3, b_2 crosses
    cuts 2 and 3.  Cut contributions to the b-periods cancel between the two
    sheets, so only the gap segments enter.
    """
    y1, y2, y3, y4, y5 = curve.branch
    I = {}
    for i in (1, 2):
        I[("s1", i)] = segment_du(curve, i, y1, y2, tol)
        I[("s2", i)] = segment_du(curve, i, y2, y3, tol)
        I[("s3", i)] = segment_du(curve, i, y3, y4, tol)
        I[("s4", i)] = segment_du(curve, i, y4, y5, tol)

    A = np.empty((2, 2), dtype=complex)
    B = np.empty((2, 2), dtype=complex)
    for i in (1, 2):
        A[i - 1, 0] = 2.0 * I[("s1", i)]
        A[i - 1, 1] = 2.0 * I[("s3", i)]
        B[i - 1, 0] = 2.0 * (I[("s2", i)] + I[("s4", i)])
        B[i - 1, 1] = 2.0 * I[("s4", i)]

    cond = np.linalg.cond(A)
    if cond > 1e12:
        raise CurveError(f"ill-conditioned A-period matrix (cond {cond:.3e})")
    C = np.linalg.inv(A)
    Omega = C @ B

    if np.max(np.abs(Omega - Omega.T)) > 1e-9 * (1 + np.max(np.abs(Omega))):
        raise CurveError("period matrix failed the symmetry check")
    if np.linalg.eigvalsh(Omega.imag)[0] <= 0:
        raise CurveError("Im Omega not positive definite; cycle orientation broken")
    return PeriodData(Amat=A, Bmat=B, Cmat=C, Omega=Omega)


# ----------------------------------------------------------------------
# Abel map


def abel_integral_to_inf(curve: Curve, y_t: float, tol: float = 1e-11) -> np.ndarray:
    """(du_1, du_2) integrated from y_t to infinity along the upper side."""
    y = curve.branch
    out = np.zeros(2, dtype=complex)
    pts = [b for b in y if b > y_t + 1e-12]
    start = y_t
    for b in pts:
        for i in (1, 2):
            out[i - 1] += segment_du(curve, i, start, b, tol)
        start = b
    for i in (1, 2):
        out[i - 1] += segment_du(curve, i, start, math.inf, tol)
    return out


def abel_map_raw(
    curve: Curve, periods: PeriodData, target: CurvePoint, tol: float = 1e-11
) -> np.ndarray:
    """Unreduced Abel image int_inf^target omega along the canonical path.

    The canonical path descends the real axis from infinity on the upper
    side; lower-sheet targets use the hyperelliptic involution (base point
    infinity is fixed by sigma, so A(sigma P) = -A(P)).
    """
    if abs(target.y.imag) > 1e-12:
        raise CurveError("canonical Abel paths require a real y-coordinate")
    du = abel_integral_to_inf(curve, float(target.y.real), tol)
    z = -(periods.Cmat @ du)
    if target.sheet == 1:
        z = -z
    return z


def abel_map(
    curve: Curve,
    periods: PeriodData,
    target: CurvePoint,
    base: CurvePoint | None = None,
    tol: float = 1e-11,
):
    """Lattice-reduced Abel image of `target` from base infinity (default) or
    an explicit base point; returns (JacobianPoint, raw vector)."""
    z = abel_map_raw(curve, periods, target, tol)
    if base is not None:
        z = z - abel_map_raw(curve, periods, base, tol)
    red, _m = _reduce(periods.Omega, z)
    return red, z


def _reduce(Omega, z_raw):
    Omega = np.asarray(Omega, dtype=complex)
    Y = Omega.imag
    v = np.linalg.solve(Y, np.asarray(z_raw).imag)
    m = np.floor(v + 1e-12).astype(int)
    z1 = np.asarray(z_raw) - Omega @ m
    u = z1.real - Omega.real @ (v - m)
    n = np.floor(u + 1e-12).astype(int)
    return JacobianPoint(z=z1 - n, m=m, n=n), m


def lattice_residual(Omega, delta) -> float:
    """Distance of a vector from the period lattice Z^2 + Omega Z^2."""
    Omega = np.asarray(Omega, dtype=complex)
    v = np.linalg.solve(Omega.imag, np.asarray(delta).imag)
    m = np.round(v).astype(int)
    z1 = np.asarray(delta) - Omega @ m
    n = np.round(z1.real - Omega.real @ (v - m)).astype(int)
    return float(np.linalg.norm(z1 - n))


# ----------------------------------------------------------------------
# omega_2 zeros and involutions


def omega2_zeros(curve: Curve, periods: PeriodData):
    """The two zeros R, Q = sigma(R) of the normalized differential omega_2."""
    c21, c22 = periods.Cmat[1, 0], periods.Cmat[1, 1]
    if abs(c22) < 1e-12 * (1.0 + abs(c21)):
        raise CurveError("degenerate differential: omega_2 has its zero at infinity")
    y0 = -c21 / c22
    if abs(y0.imag) > 1e-9:
        raise CurveError("omega_2 zero is not real; unexpected for real branch points")
    y0 = float(y0.real)
    R = curve.point(y0, 0)
    Q = curve.point(y0, 1)
    return R, Q


def apply_involution(curve: Curve, which: str, point: CurvePoint) -> CurvePoint:
    """sigma: (y, w) -> (y, -w);  tau: (y, w) -> (conj y, conj w)."""
    if which == "sigma":
        return CurvePoint(y=point.y, sheet=1 - point.sheet, w=-point.w, curve=curve)
    if which == "tau":
        y = np.conj(point.y)
        w = np.conj(point.w)
        wu = complex(curve.w_up(y)) if abs(y.imag) < 1e-12 else complex(
            np.exp(0.5 * sum(np.log(y - b + 0j) for b in curve.branch))
        )
        sheet = 0 if abs(w - wu) <= abs(w + wu) else 1
        return CurvePoint(y=y, sheet=sheet, w=w, curve=curve)
    raise CurveError("involution must be 'sigma' or 'tau'")


# ----------------------------------------------------------------------
# serialization


def _c2l(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def curve_to_json(curve: Curve, periods: PeriodData | None = None) -> dict:
    doc = {"branch": list(curve.branch)}
    if periods is not None:
        for name, mat in (
            ("Amat", periods.Amat),
            ("Bmat", periods.Bmat),
            ("Omega", periods.Omega),
            ("Cmat", periods.Cmat),
        ):
            doc[name] = [[_c2l(mat[i, j]) for j in range(2)] for i in range(2)]
    return doc
