"""Genus-2 Riemann theta function: lattice sums, derivatives, tori, divisor roots.

The theta function of a 2x2 symmetric period matrix Omega with positive
definite imaginary part is the lattice sum

    theta(z) = sum_{n in Z^2} exp(pi*i*<Omega n, n> + 2*pi*i*<n, z>).

Evaluation always reduces the argument to a fundamental-domain representative
first and restores the quasi-periodicity prefactor exactly, so arguments with
large imaginary part neither overflow nor lose precision.  Derivatives of any
order are term-wise lattice sums; the public entry point caps the order at 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct

import numpy as np

from .curve import JacobianPoint

TWO_PI_I = 2j * math.pi

#: shifts of the four real tori T1..T4 inside the Jacobian
TORUS_SHIFTS = {
    1: np.array([0.0, 0.0]),
    2: np.array([0.5, 0.0]),
    3: np.array([0.0, 0.5]),
    4: np.array([0.5, 0.5]),
}


class ThetaError(Exception):
    """Base error for theta evaluation."""


class TruncationError(ThetaError):
    """Requested tail bound not achievable within the maximum radius."""


class DivisorProximityError(ThetaError):
    """Argument too close to the theta divisor for a log-derivative."""


class NoRootError(ThetaError):
    """No zero of theta found on the given path bracket."""


@dataclass(frozen=True)
class DerivIndex:
    """Partial-derivative multi-index (k1, k2), total order at most 3."""

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("derivative index components must be nonnegative")
        if self.k1 + self.k2 > 3:
            raise ValueError("derivative order above 3 is not supported")

    @property
    def order(self) -> int:
        return self.k1 + self.k2

    def as_tuple(self) -> tuple[int, int]:
        return (self.k1, self.k2)


@dataclass(frozen=True)
class TorusSpec:
    """One of the four real tori T1..T4 with real parameters (t1, t2)."""

    index: int
    t1: float
    t2: float

    def __post_init__(self):
        if self.index not in (1, 2, 3, 4):
            raise ValueError("torus index must be 1..4")


def _as_index(d) -> tuple[int, int]:
    if isinstance(d, DerivIndex):
        return d.as_tuple()
    d = (int(d[0]), int(d[1]))
    if d[0] < 0 or d[1] < 0:
        raise ValueError("derivative index components must be nonnegative")
    return d


@lru_cache(maxsize=32)
def _integer_box(n: int) -> np.ndarray:
    r = np.arange(-n, n + 1)
    g1, g2 = np.meshgrid(r, r, indexing="ij")
    return np.stack([g1.ravel(), g2.ravel()], axis=1).astype(float)


class ThetaContext:
    """Period matrix plus truncation policy for theta evaluation.

    Parameters
    ----------
    Omega : (2, 2) complex array, symmetric, Im Omega positive definite
    tol : target absolute bound on the omitted lattice-sum tail
    """

    MAX_RADIUS = 60

    def __init__(self, Omega, tol: float = 1e-14):
        Omega = np.asarray(Omega, dtype=complex)
        if Omega.shape != (2, 2):
            raise ValueError("Omega must be 2x2")
        if np.max(np.abs(Omega - Omega.T)) > 1e-10 * (1 + np.max(np.abs(Omega))):
            raise ValueError("Omega must be symmetric")
        Y = Omega.imag
        evals = np.linalg.eigvalsh(Y)
        if evals[0] <= 0:
            raise ValueError("Im Omega must be positive definite")
        self.Omega = Omega
        self.X = Omega.real.copy()
        self.Y = Y.copy()
        self.Yinv = np.linalg.inv(Y)
        self.lam_min = float(evals[0])
        self.tol = float(tol)
        self._term_cache: dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------
    # lattice reduction

    def reduce_raw(self, z_raw):
        """Split z_raw = z0 + Omega m + n with z0 in the fundamental domain."""
        z_raw = np.asarray(z_raw, dtype=complex).reshape(2)
        v = self.Yinv @ z_raw.imag
        m = np.floor(v + 1e-12).astype(int)
        z1 = z_raw - self.Omega @ m
        v0 = v - m
        u = z1.real - self.X @ v0
        n = np.floor(u + 1e-12).astype(int)
        z0 = z1 - n
        return z0, m, n

    def lattice_reduce(self, z_raw):
        """Reduce z_raw modulo the period lattice.

        Returns a :class:`JacobianPoint` and the prefactor such that
        ``theta(z_raw) = prefactor * theta(z0)`` per the quasi-periodicity law.
        """
        z0, m, n = self.reduce_raw(z_raw)
        pref = np.exp(
            1j * math.pi * (m @ self.Omega @ m) - TWO_PI_I * (m @ np.asarray(z_raw))
        )
        return JacobianPoint(z=z0, m=m, n=n), complex(pref)

    # ------------------------------------------------------------------
    # truncation control

    def _shell_bound(self, k: int, rho: float, order: int) -> float:
        # |n|_inf = k shell: 8k points, |n|_2 <= k*sqrt(2)
        r2 = k * math.sqrt(2.0)
        e = -math.pi * self.lam_min * k * k + 2.0 * math.pi * r2 * rho
        if e > 700.0:
            return math.inf
        return 8.0 * max(k, 1) * (2.0 * math.pi * r2 + 1.0) ** order * math.exp(e)

    def tail_bound(self, n_box: int, rho: float, order: int) -> float:
        total = 0.0
        for k in range(n_box + 1, n_box + 400):
            t = self._shell_bound(k, rho, order)
            total += t
            if t < 1e-300 or (total > 0 and t < 1e-18 * total):
                break
        return total

    def choose_box(self, rho: float, order: int, tol: float | None = None) -> int:
        tol = self.tol if tol is None else tol
        n = 2
        while n <= self.MAX_RADIUS:
            if self.tail_bound(n, rho, order) <= tol:
                return n
            n += 1
        raise TruncationError(
            f"tail bound {tol:g} not achievable within radius {self.MAX_RADIUS}"
            f" (rho={rho:g}, order={order})"
        )

    def _quad_terms(self, n_box: int) -> np.ndarray:
        arr = self._term_cache.get(n_box)
        if arr is None:
            N = _integer_box(n_box)
            q = np.einsum("ki,ij,kj->k", N, self.Omega, N)
            arr = np.exp(1j * math.pi * q)
            self._term_cache[n_box] = arr
        return arr

    # ------------------------------------------------------------------
    # core evaluation

    def _raw_table(self, Z0, indices, n_box):
        """Term-wise derivative sums at already-reduced points.

        Z0 : (P, 2) reduced arguments; indices : list of multi-indices.
        Returns dict index -> (P,) array of derivative values.
        """
        N = _integer_box(n_box)
        base = self._quad_terms(n_box)
        out = {idx: np.empty(len(Z0), dtype=complex) for idx in indices}
        factors = {
            idx: base * (TWO_PI_I * N[:, 0]) ** idx[0] * (TWO_PI_I * N[:, 1]) ** idx[1]
            for idx in indices
        }
        chunk = max(1, int(4e6 / max(len(N), 1)))
        for s in range(0, len(Z0), chunk):
            zb = Z0[s : s + chunk]
            W = np.exp(TWO_PI_I * (N @ zb.T))
            for idx in indices:
                out[idx][s : s + chunk] = factors[idx] @ W
        return out

    def eval_many(self, Z, indices=((0, 0),), tol: float | None = None):
        """Evaluate theta derivatives at a batch of raw arguments.

        Z : (P, 2) complex; indices : iterable of multi-indices (any order).
        Returns (values, err) where values is dict index -> (P,) array of
        derivatives at the *raw* arguments and err bounds the truncation tail
        of the underlying reduced-point sums.
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        indices = [tuple(ix) for ix in indices]
        max_ord = max(i + j for i, j in indices) if indices else 0
        # vectorized reduction
        V = Z.imag @ self.Yinv.T
        M = np.floor(V + 1e-12).astype(int)
        Z1 = Z - M @ self.Omega.T
        U = Z1.real - (V - M) @ self.X.T
        Nn = np.floor(U + 1e-12).astype(int)
        Z0 = Z1 - Nn
        rho = float(np.max(np.linalg.norm(Z0.imag, axis=1))) if len(Z0) else 0.0
        n_box = self.choose_box(rho, max_ord, tol)
        err = self.tail_bound(n_box, rho, max_ord)

        need = sorted(
            {(a, b) for i, j in indices for a in range(i + 1) for b in range(j + 1)}
        )
        raw = self._raw_table(Z0, need, n_box)

        # restore derivatives at the raw argument via the Leibniz rule applied
        # to the quasi-periodicity prefactor  G(w) = exp(pi i <Om m,m> - 2pi i <m,w>)
        mOm = np.einsum("pi,ij,pj->p", M, self.Omega, M)
        G = np.exp(1j * math.pi * mOm - TWO_PI_I * np.einsum("pi,pi->p", M, Z))
        fac1 = -TWO_PI_I * M[:, 0]
        fac2 = -TWO_PI_I * M[:, 1]
        out = {}
        for d1, d2 in indices:
            acc = np.zeros(len(Z), dtype=complex)
            for k1 in range(d1 + 1):
                for k2 in range(d2 + 1):
                    c = math.comb(d1, k1) * math.comb(d2, k2)
                    acc += (
                        c
                        * fac1 ** (d1 - k1)
                        * fac2 ** (d2 - k2)
                        * raw[(k1, k2)]
                    )
            out[(d1, d2)] = G * acc
        return out, err

    def deriv_table(self, z, order: int, tol: float | None = None):
        """All derivatives of theta at z up to total order (internal, any order)."""
        indices = [
            (i, j) for i in range(order + 1) for j in range(order + 1 - i)
        ]
        vals, _ = self.eval_many(np.asarray(z, dtype=complex).reshape(1, 2), indices, tol)
        return {idx: complex(v[0]) for idx, v in vals.items()}


# ----------------------------------------------------------------------
# public operations


def lattice_reduce(ctx: ThetaContext, z_raw):
    return ctx.lattice_reduce(z_raw)


def theta_eval(ctx: ThetaContext, z, d=(0, 0), tol: float | None = None):
    """theta derivative at z with a rigorous tail bound.

    Returns (value, err).  The derivative order is capped at 3; internal
    callers needing higher orders use :meth:`ThetaContext.deriv_table`.
    """
    idx = _as_index(d)
    if idx[0] + idx[1] > 3:
        raise ValueError("derivative order above 3 is not supported")
    vals, err = ctx.eval_many(np.asarray(z, dtype=complex).reshape(1, 2), [idx], tol)
    return complex(vals[idx][0]), float(err)


def theta_value(ctx: ThetaContext, z) -> complex:
    return theta_eval(ctx, z)[0]


def log_theta_deriv(ctx: ThetaContext, z, d, guard: float = 1e-12) -> complex:
    """Derivative of log theta at z, via exact quotient-rule combinations."""
    d1, d2 = _as_index(d)
    order = d1 + d2
    if order == 0:
        raise ValueError("order-zero log-derivative is just log theta")
    if order > 3:
        raise ValueError("derivative order above 3 is not supported")
    t = ctx.deriv_table(z, order)
    f = t[(0, 0)]
    if abs(f) <= guard:
        raise DivisorProximityError(f"divisor proximity: |theta(z)| = {abs(f):.3e}")

    def g(i):
        return t[i] / f

    e = [(1, 0), (0, 1)]
    if order == 1:
        return g((d1, d2))
    if order == 2:
        i = e[0] if d1 else e[1]
        j = (d1 - i[0], d2 - i[1])
        return g((d1, d2)) - g(i) * g(j)
    # order == 3: split d into three unit steps i, j, k
    units = [e[0]] * d1 + [e[1]] * d2
    i, j, k = units
    gij = (i[0] + j[0], i[1] + j[1])
    gik = (i[0] + k[0], i[1] + k[1])
    gjk = (j[0] + k[0], j[1] + k[1])
    return (
        g((d1, d2))
        - g(gij) * g(k)
        - g(gik) * g(j)
        - g(gjk) * g(i)
        + 2.0 * g(i) * g(j) * g(k)
    )


def torus_point(ctx: ThetaContext, spec: TorusSpec) -> JacobianPoint:
    """Lattice-reduced point of the real torus T_j at parameters (t1, t2)."""
    z = 1j * np.array([spec.t1, spec.t2]) + TORUS_SHIFTS[spec.index]
    pt, _ = ctx.lattice_reduce(z)
    return pt


def torus_grid(ctx: ThetaContext, index: int, n: int, window: float = 1.0):
    """Theta values on an n x n parameter grid of torus T_index.

    Returns (t1 grid, t2 grid, theta values), all shape (n, n).
    """
    t = np.linspace(0.0, window, n, endpoint=False)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    Z = 1j * np.stack([T1.ravel(), T2.ravel()], axis=1) + TORUS_SHIFTS[index]
    vals, _ = ctx.eval_many(Z, [(0, 0)])
    return T1, T2, vals[(0, 0)].reshape(n, n)


def divisor_solve(
    ctx: ThetaContext,
    path,
    bracket,
    samples: int = 201,
    residual_tol: float = 1e-10,
    max_newton: int = 60,
):
    """Locate t* in the bracket with theta(path(t*)) = 0.

    path must accept complex t (analytic in t).  Raises NoRootError if no
    zero is found to the requested residual.
    """
    t0, t1 = bracket
    if not (t1 > t0):
        raise ValueError("bracket must satisfy t0 < t1")
    ts = np.linspace(t0, t1, samples)
    Z = np.array([path(t) for t in ts], dtype=complex)
    vals, _ = ctx.eval_many(Z, [(0, 0)])
    mags = np.abs(vals[(0, 0)])
    k = int(np.argmin(mags))

    # bisection-style descent on |theta|^2 around the grid minimum
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, samples - 1)]
    t = ts[k]

    def f(tt):
        return theta_value(ctx, np.asarray(path(tt)))

    for _ in range(40):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if abs(f(m1)) < abs(f(m2)):
            hi = m2
            t = m1
        else:
            lo = m1
            t = m2
        if hi - lo < 1e-6 * max(1.0, abs(t1 - t0)):
            break

    # Newton polish on the analytic restriction, numerical derivative
    h = 1e-6 * max(1.0, abs(t1 - t0))
    t = complex(t)
    span = abs(t1 - t0)
    for _ in range(max_newton):
        v = f(t)
        if abs(v) < residual_tol:
            # a root is only accepted on the real path inside the bracket;
            # Newton wandering off into complex t means there was no root
            if abs(t.imag) < 1e-6 * span and t0 - 1e-6 * span <= t.real <= t1 + 1e-6 * span:
                return t.real
            break
        dv = (f(t + h) - f(t - h)) / (2.0 * h)
        if dv == 0:
            break
        step = v / dv
        if abs(step) > 0.5 * abs(t1 - t0):
            step *= 0.5 * abs(t1 - t0) / abs(step)
        t = t - step
    raise NoRootError(
        f"no theta zero on path bracket [{t0}, {t1}]: best residual {abs(f(t)):.3e}"
    )


def brute_force_theta(Omega, z, radius: int = 40, d=(0, 0)) -> complex:
    """Direct double sum over a square lattice block; independent oracle."""
    Omega = np.asarray(Omega, dtype=complex)
    z = np.asarray(z, dtype=complex)
    d1, d2 = _as_index(d)
    total = 0.0 + 0.0j
    for n1, n2 in iproduct(range(-radius, radius + 1), repeat=2):
        n = np.array([n1, n2], dtype=float)
        term = np.exp(1j * math.pi * (n @ Omega @ n) + TWO_PI_I * (n @ z))
        total += (TWO_PI_I * n1) ** d1 * (TWO_PI_I * n2) ** d2 * term
    return complex(total)
