"""Truncated Taylor arithmetic.

A :class:`Jet` stores normalized Taylor coefficients ``c[k] = f^(k)(r)/k!``
of a function at a batch of points (the trailing axes). Field formulas are
written once with jets and every derivative needed downstream falls out of
the arithmetic, so the closed-form and tabulated profiles share a single
code path.
"""

from math import factorial

import numpy as np


class Jet:
    """Taylor jet of fixed order over an array of base points.

    Args:
        coeffs: array of shape ``(order + 1, *shape)``.
    """

    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs)

    @property
    def order(self):
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, r, order):
        """The jet of the identity map at ``r``."""
        r = np.asarray(r, dtype=float)
        c = np.zeros((order + 1,) + r.shape)
        c[0] = r
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs):
        """Build from a sequence ``[f, f', f'', ...]``."""
        return cls(np.array([d / factorial(k) for k, d in enumerate(derivs)]))

    @classmethod
    def constant(cls, value, like):
        c = np.zeros_like(like.c, dtype=np.result_type(like.c, value))
        c[0] = value
        return cls(c)

    def value(self):
        return self.c[0]

    def derivative(self, k):
        """The k-th derivative at the base points."""
        return self.c[k] * factorial(k)

    def derivatives(self):
        return [self.derivative(k) for k in range(self.order + 1)]

    def truncate(self, order):
        return Jet(self.c[: order + 1])

    def d(self):
        """Jet of the derivative (order drops by one)."""
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Jet):
            m = min(self.order, other.order)
            return self.c[: m + 1], other.c[: m + 1]
        return self.c, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            c = a.astype(np.result_type(a, other), copy=True)
            c[0] = c[0] + other
            return Jet(c)
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a * other)
        n = a.shape[0]
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(n):
            for j in range(k + 1):
                out[k] = out[k] + a[j] * b[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.c
        out = np.zeros_like(a, dtype=np.result_type(a, 1.0))
        out[0] = 1.0 / a[0]
        for k in range(1, a.shape[0]):
            s = 0
            for j in range(1, k + 1):
                s = s + a[j] * out[k - j]
            out[k] = -s * out[0]
        return Jet(out)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(1.0, self)
        for _ in range(p):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.c.shape[1:]})"


def power_jet(r, p, order):
    """Jet of ``r**p`` for real ``p`` at ``r > 0``."""
    r = np.asarray(r, dtype=float)
    c = np.empty((order + 1,) + r.shape)
    coef = 1.0
    for k in range(order + 1):
        c[k] = coef * r ** (p - k)
        coef = coef * (p - k) / (k + 1)
    return Jet(c)
