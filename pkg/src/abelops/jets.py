"""Truncated two-variable Taylor arithmetic.

A jet stores the Taylor coefficients of an analytic function of
x = (x1, x2) around a base point, up to a fixed total order: c[i, j] is the
coefficient of x1^i x2^j, so c[0, 0] is the value.  All operations truncate
to the common order.  Used for exact x-differentiation of the operator
coefficient fields, which are built from theta functions whose derivative
tables are available to any order; no numerical differentiation is involved.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    """Polynomial jet of total order N; coefficients on the triangle i+j <= N."""

    __slots__ = ("c", "order")

    def __init__(self, c: np.ndarray, order: int):
        self.c = np.asarray(c, dtype=complex)
        self.order = int(order)

    # constructors

    @classmethod
    def constant(cls, value: complex, order: int) -> "Jet":
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, order)

    @classmethod
    def linear(cls, value: complex, g1: complex, g2: complex, order: int) -> "Jet":
        """Jet of value + g1*x1 + g2*x2."""
        c = np.zeros((order + 1, order + 1), dtype=complex)
        c[0, 0] = value
        if order >= 1:
            c[1, 0] = g1
            c[0, 1] = g2
        return cls(c, order)

    @classmethod
    def from_derivs(cls, table: dict[tuple[int, int], complex], order: int) -> "Jet":
        """Build from raw derivative values d^(i,j) f; divides by i! j!."""
        c = np.zeros((order + 1, order + 1), dtype=complex)
        for (i, j), v in table.items():
            if i + j <= order:
                c[i, j] = v / (factorial(i) * factorial(j))
        return cls(c, order)

    # helpers

    @property
    def value(self) -> complex:
        return complex(self.c[0, 0])

    def _mask(self):
        n = self.order
        i, j = np.indices(self.c.shape)
        return i + j <= n

    def truncated(self) -> "Jet":
        out = self.c.copy()
        out[~self._mask()] = 0.0
        return Jet(out, self.order)

    # ring operations

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = self.c.copy()
            out[0, 0] += other
            return Jet(out, self.order)
        return Jet(self.c + other.c, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other, self.order)
        n = min(self.order, other.order)
        a = self.c[: n + 1, : n + 1]
        b = other.c[: n + 1, : n + 1]
        out = np.zeros((n + 1, n + 1), dtype=complex)
        for i in range(n + 1):
            for j in range(n + 1 - i):
                if a[i, j] != 0.0:
                    out[i:, j:][: n + 1 - i, : n + 1 - j] += (
                        a[i, j] * b[: n + 1 - i, : n + 1 - j]
                    )
        return Jet(out, n).truncated()

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self) -> "Jet":
        f0 = self.c[0, 0]
        if f0 == 0.0:
            raise ZeroDivisionError("jet with vanishing constant term")
        g = self * (1.0 / f0) - 1.0  # nilpotent part
        out = Jet.constant(0.0, self.order)
        term = Jet.constant(1.0, self.order)
        for k in range(self.order + 1):
            out = out + term
            term = term * g * (-1.0)
        return out * (1.0 / f0)

    def exp(self) -> "Jet":
        f0 = self.c[0, 0]
        g = self - f0
        out = Jet.constant(0.0, self.order)
        term = Jet.constant(1.0, self.order)
        for k in range(self.order + 1):
            out = out + term
            term = term * g * (1.0 / (k + 1))
        return out * np.exp(f0)

    def log(self) -> "Jet":
        """Principal-branch log; only the constant term depends on the branch."""
        f0 = self.c[0, 0]
        if f0 == 0.0:
            raise ZeroDivisionError("log of a jet with vanishing constant term")
        g = self * (1.0 / f0) - 1.0
        out = Jet.constant(np.log(f0), self.order)
        term = g
        for k in range(1, self.order + 1):
            out = out + term * ((-1.0) ** (k + 1) / k)
            term = term * g
        return out

    # calculus

    def deriv(self, k1: int, k2: int) -> "Jet":
        """Jet of the (k1, k2) partial derivative, of order reduced accordingly."""
        n = self.order - k1 - k2
        if n < 0:
            raise ValueError("jet order too low for requested derivative")
        out = np.zeros((n + 1, n + 1), dtype=complex)
        for i in range(n + 1):
            for j in range(n + 1 - i):
                f = 1.0
                for t in range(k1):
                    f *= i + k1 - t
                for t in range(k2):
                    f *= j + k2 - t
                out[i, j] = self.c[i + k1, j + k2] * f
        return Jet(out, n)

    def deriv_value(self, k1: int, k2: int) -> complex:
        """Value of the (k1, k2) partial derivative at the base point."""
        return complex(self.c[k1, k2]) * factorial(k1) * factorial(k2)
