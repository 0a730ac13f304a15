"""Vortex-column base flows and the scalar fields of the Rayleigh potential.

A profile supplies Taylor jets of the angular velocity ``Omega = V/r``, the
axial velocity ``W`` and the circulation ``Gamma = r V``. Everything else
(``Lambda``, ``Phi``, ``q``, ``a``, ``b``, ``d``, ``p`` and the potential
``k``) is assembled from those jets in :func:`eval_fields`, so derivatives of
any field come for free.

Conventions: lengths and velocities are dimensionless, the perturbation is
``u(r) exp(i(alpha z - n theta))`` and ``beta = alpha / n``.
"""

import json
from dataclasses import dataclass, field
from math import factorial
from pathlib import Path

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import DomainError, PoleError, SingularProfile, ValidationError
from .jets import Jet, power_jet

__all__ = [
    "VortexProfile",
    "BatchelorProfile",
    "TabulatedProfile",
    "FunctionProfile",
    "PotentialParams",
    "FieldBundle",
    "eval_fields",
    "eval_gamma",
    "eval_potential_k",
    "potential_r2k",
    "load_profile",
    "PotentialCoefficients",
    "potential_coefficients",
]


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("radius must be finite and strictly positive")
    return r


class VortexProfile:
    """Base class. Subclasses implement :meth:`jets`."""

    kind = "abstract"
    #: constant value of q(r) when known in closed form, else None
    q_constant = None
    #: highest jet order the profile can deliver
    max_order = 12

    def jets(self, r, order):
        """Return ``{"Omega", "W", "Gamma"}`` jets of the given order at ``r``."""
        raise NotImplementedError

    def V(self, r):
        r = _check_radius(r)
        return r * self.jets(r, 0)["Omega"].value()

    def W(self, r):
        r = _check_radius(r)
        return self.jets(r, 0)["W"].value()

    def Omega(self, r):
        r = _check_radius(r)
        return self.jets(r, 0)["Omega"].value()

    def to_dict(self):
        raise NotImplementedError


class BatchelorProfile(VortexProfile):
    """Batchelor (trailing line) vortex ``V = q(1 - e^{-r^2})/r``, ``W = e^{-r^2}``.

    Args:
        q: swirl parameter, strictly positive.
    """

    kind = "batchelor"
    _SERIES_TERMS = 40

    def __init__(self, q):
        q = float(q)
        if not q > 0:
            raise ValidationError("Batchelor swirl q must be positive")
        self.q = q
        self.q_constant = q

    def __repr__(self):
        return f"BatchelorProfile(q={self.q!r})"

    def to_dict(self):
        return {"kind": "batchelor", "q": self.q}

    def _w_jet(self, r, order):
        # W^(k) = (-1)^k H_k(r) e^{-r^2}, physicists' Hermite H_k
        e = np.exp(-r * r)
        h_prev, h = np.zeros_like(r), np.ones_like(r)
        c = np.empty((order + 1,) + r.shape)
        for k in range(order + 1):
            c[k] = (-1) ** k * h * e / factorial(k)
            h_prev, h = h, 2 * r * h - 2 * k * h_prev
        return Jet(c)

    def _omega_series(self, r, order):
        # Omega = q sum_j (-1)^j r^{2j} / (j+1)!, accurate for r < 1
        c = np.zeros((order + 1,) + r.shape)
        for j in range(self._SERIES_TERMS):
            cj = self.q * (-1) ** j / factorial(j + 1)
            binom = 1.0
            for k in range(min(order, 2 * j) + 1):
                c[k] += cj * binom * r ** (2 * j - k)
                binom = binom * (2 * j - k) / (k + 1)
        return Jet(c)

    def jets(self, r, order):
        r = np.asarray(r, dtype=float)
        W = self._w_jet(r, order)
        g = -self.q * W.c
        g[0] = -self.q * np.expm1(-r * r)
        G = Jet(g)
        small = r < 1.0
        Om = G * power_jet(np.where(small, 1.0, r), -2, order)
        if np.any(small):
            Os = self._omega_series(np.where(small, r, 0.5), order)
            Om = Jet(np.where(small, Os.c, Om.c))
        return {"Omega": Om, "W": W, "Gamma": G}


class TabulatedProfile(VortexProfile):
    """Profile interpolated from samples of ``V`` and ``W`` by quintic splines.

    Derivatives are those of the interpolant, so they exist up to order five
    (the fifth is piecewise constant).

    Args:
        r: strictly increasing sample radii (``r[0] >= 0``).
        V: swirl velocity samples.
        W: axial velocity samples.
    """

    kind = "tabulated"
    max_order = 5

    def __init__(self, r, V, W):
        r = np.asarray(r, dtype=float)
        V = np.asarray(V, dtype=float)
        W = np.asarray(W, dtype=float)
        if r.ndim != 1 or r.shape != V.shape or r.shape != W.shape:
            raise ValidationError("r, V, W must be 1-D arrays of equal length")
        if r.size < 8:
            raise ValidationError("need at least 8 samples for a quintic spline")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ValidationError("sample radii must be non-negative and increasing")
        self.r_samples, self.V_samples, self.W_samples = r, V, W
        self.r_range = (float(r[0]), float(r[-1]))
        self._V = make_interp_spline(r, V, k=5)
        self._W = make_interp_spline(r, W, k=5)

    @classmethod
    def from_profile(cls, profile, r):
        """Sample another profile (handy for testing the spline path)."""
        r = np.asarray(r, dtype=float)
        rr = np.where(r > 0, r, 1e-300)
        V = np.where(r > 0, profile.V(rr), 0.0)
        return cls(r, V, profile.W(rr))

    def to_dict(self):
        return {
            "kind": "tabulated",
            "r": self.r_samples.tolist(),
            "V": self.V_samples.tolist(),
            "W": self.W_samples.tolist(),
        }

    def jets(self, r, order):
        if order > self.max_order:
            raise ValidationError(f"tabulated profiles support jets up to order {self.max_order}")
        r = np.asarray(r, dtype=float)
        if np.any(r > self.r_samples[-1]) or np.any(r < self.r_samples[0]):
            raise DomainError("radius outside the tabulated range")
        Vj = Jet.from_derivatives([self._V(r, nu=k) for k in range(order + 1)])
        W = Jet.from_derivatives([self._W(r, nu=k) for k in range(order + 1)])
        rj = Jet.variable(r, order)
        return {"Omega": Vj / rj, "W": W, "Gamma": Vj * rj}


def _fd_weights(k):
    """Central weights for the k-th derivative, at least fourth order."""
    M = k // 2 + 2
    j = np.arange(-M, M + 1, dtype=float)
    A = np.array([j**m / factorial(m) for m in range(2 * M + 1)])
    rhs = np.zeros(2 * M + 1)
    rhs[k] = 1.0
    return j, np.linalg.solve(A, rhs)


class FunctionProfile(VortexProfile):
    """Profile given by callables ``V(r)`` and ``W(r)``.

    Derivatives come from centered finite differences of at least fourth
    order. The first derivative uses the step ``1e-5 max(1, r)``; higher
    derivatives use ``eps^(1/(k+4)) max(1, r)``, which balances truncation
    against round-off for each order.

    Args:
        V, W: vectorized callables of ``r``.
        q_constant: closed-form value of q(r) if known.
    """

    kind = "function"
    max_order = 6

    def __init__(self, V, W, q_constant=None, name="function"):
        self._Vf, self._Wf = V, W
        self.q_constant = q_constant
        self.name = name

    def to_dict(self):
        return {"kind": "function", "name": self.name}

    def _derivs(self, f, r, order):
        out = [np.asarray(f(r), dtype=float) * np.ones_like(r)]
        scale = np.maximum(1.0, r)
        for k in range(1, order + 1):
            step = 1e-5 if k == 1 else np.finfo(float).eps ** (1.0 / (k + 4))
            offs, w = _fd_weights(k)
            h = np.minimum(step * scale, r / (offs.max() + 1))
            acc = np.zeros_like(r)
            for o, wk in zip(offs, w):
                if wk != 0:
                    acc = acc + wk * f(r + o * h)
            out.append(acc / h**k)
        return out

    def jets(self, r, order):
        if order > self.max_order:
            raise ValidationError(f"function profiles support jets up to order {self.max_order}")
        r = np.asarray(r, dtype=float)
        Vj = Jet.from_derivatives(self._derivs(self._Vf, r, order))
        W = Jet.from_derivatives(self._derivs(self._Wf, r, order))
        rj = Jet.variable(r, order)
        return {"Omega": Vj / rj, "W": W, "Gamma": Vj * rj}


def load_profile(spec):
    """Build a profile from a JSON string, path or already-parsed dict.

    Accepted forms: ``{"kind": "batchelor", "q": 0.25}`` and
    ``{"kind": "tabulated", "r": [...], "V": [...], "W": [...]}``.
    """
    if isinstance(spec, VortexProfile):
        return spec
    if isinstance(spec, (str, Path)):
        s = str(spec)
        if s.lstrip().startswith("{"):
            spec = json.loads(s)
        else:
            spec = json.loads(Path(s).read_text())
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("profile spec must be a JSON object with a 'kind' key")
    kind = spec["kind"].lower()
    if kind == "batchelor":
        return BatchelorProfile(spec["q"])
    if kind == "tabulated":
        return TabulatedProfile(spec["r"], spec["V"], spec["W"])
    raise ValidationError(f"unknown profile kind {spec['kind']!r}")


@dataclass(frozen=True)
class PotentialParams:
    """Wavenumber data entering the potential.

    Attributes:
        beta: alpha / n.
        n: azimuthal wavenumber, positive integer.
        omega: complex frequency.
    """

    beta: float
    n: int
    omega: complex = 0j

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("n must be a positive integer")

    @property
    def alpha(self):
        return self.beta * self.n


@dataclass
class FieldBundle:
    """Scalar fields at a batch of radii.

    ``dLambda`` and ``db`` hold the first, second and third derivatives.
    ``jets`` keeps the underlying Taylor jets for further differentiation.
    """

    r: np.ndarray
    beta: float
    Omega: np.ndarray
    V: np.ndarray
    W: np.ndarray
    Gamma: np.ndarray
    Lambda: np.ndarray
    Phi: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    p: np.ndarray
    dLambda: tuple
    db: tuple
    jets: dict = field(repr=False, default_factory=dict)


def _field_jets(profile, beta, r, order):
    """Jets of Lambda, Phi, q, a, b, d, p valid to ``order``."""
    K = order + 2
    J = profile.jets(r, K)
    Om, W, G = J["Omega"], J["W"], J["Gamma"]
    rj = Jet.variable(r, K)
    b2 = beta * beta
    one_b = rj * rj * b2 + 1.0
    Lam = W * beta - Om
    Gp, Wp = G.d(), W.d()
    Phi = G * Gp * 2.0 * power_jet(r, -3, K - 1)
    if profile.q_constant is not None:
        qj = Jet.constant(float(profile.q_constant), Gp)
    else:
        if np.any(Wp.value() == 0):
            raise SingularProfile("W'(r) = 0, q(r) undefined")
        qj = -Gp / Wp
    b = rj * rj * beta * (1.0 - qj * beta) * Phi / (qj * one_b)
    X = (rj * Wp * beta - Gp / rj) / one_b
    a = rj * X.d()
    d = -(rj * rj * 10 * b2 - (rj**4) * 3 * b2 * b2 + 1.0) / (one_b**3 * 4.0)
    p = one_b / (rj * rj)
    return {
        "Omega": Om, "W": W, "Gamma": G, "Lambda": Lam, "Phi": Phi,
        "q": qj, "a": a, "b": b, "d": d, "p": p,
    }


def eval_fields(profile, beta, r, order=3):
    """Evaluate every scalar field of the potential at radii ``r``.

    Args:
        profile: a :class:`VortexProfile`.
        beta: wavenumber ratio alpha / n.
        r: radius or array of radii, all > 0.
        order: number of derivatives of Lambda and b to return (up to 3).

    Returns:
        FieldBundle with values at ``r``.

    Raises:
        DomainError: if any r <= 0.
        SingularProfile: if q(r) is needed where W'(r) = 0.
    """
    r = _check_radius(r)
    order = max(int(order), 3)
    J = _field_jets(profile, float(beta), r, order)
    Lam, b = J["Lambda"], J["b"]
    return FieldBundle(
        r=r,
        beta=float(beta),
        Omega=J["Omega"].value(),
        V=r * J["Omega"].value(),
        W=J["W"].value(),
        Gamma=J["Gamma"].value(),
        Lambda=Lam.value(),
        Phi=J["Phi"].value(),
        q=J["q"].value() * np.ones_like(r),
        a=J["a"].value(),
        b=b.value(),
        d=J["d"].value(),
        p=J["p"].value(),
        dLambda=tuple(Lam.derivative(k) for k in (1, 2, 3)),
        db=tuple(b.derivative(k) for k in (1, 2, 3)),
        jets=J,
    )


def _gamma(Lam, n, omega):
    return n * Lam - omega


def eval_gamma(profile, params, r):
    """Doppler-shifted frequency ``gamma = n Lambda(r) - omega``."""
    r = _check_radius(r)
    J = _field_jets(profile, params.beta, r, 0)
    return _gamma(J["Lambda"].value(), params.n, complex(params.omega))


def _bracket(J, n, omega):
    g = _gamma(J["Lambda"].value(), n, omega)
    if np.any(np.abs(g) < 1e-14):
        raise PoleError("gamma vanishes: omega is real and hits n Lambda(r)")
    return 1 + J["a"].value() / (n * g) + J["b"].value() / g**2 + J["d"].value() / n**2


def eval_potential_k(profile, params, r):
    """Rayleigh potential ``k = p n^2 (1 + a/(n gamma) + b/gamma^2 + d/n^2)``.

    Raises:
        PoleError: if ``|gamma| < 1e-14`` somewhere (real omega only).
    """
    r = _check_radius(r)
    J = _field_jets(profile, params.beta, r, 0)
    n = params.n
    return J["p"].value() * n * n * _bracket(J, n, complex(params.omega))


def potential_r2k(profile, params, r):
    """``r^2 k(r)``, free of the ``1/r^2`` factor so it is safe as r -> 0."""
    r = _check_radius(r)
    J = _field_jets(profile, params.beta, r, 0)
    n = params.n
    return (1 + (params.beta * r) ** 2) * n * n * _bracket(J, n, complex(params.omega))


def potential_jet(profile, params, r, order):
    """Taylor jet of k at ``r`` (for remainder diagnostics)."""
    r = _check_radius(r)
    J = _field_jets(profile, params.beta, r, order)
    n = params.n
    g = J["Lambda"] * n - complex(params.omega)
    br = 1.0 + J["a"] / (g * n) + J["b"] / (g * g) + J["d"] / (n * n)
    return (J["p"] * br) * (n * n)


@dataclass
class PotentialCoefficients:
    """omega-independent pieces of the potential at fixed radii.

    Lets solvers evaluate ``k(r; omega)`` for many omega without
    re-evaluating the profile.
    """

    r: np.ndarray
    beta: float
    n: int
    Lambda: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    p: np.ndarray

    def k(self, omega):
        g = self.n * self.Lambda - complex(omega)
        if np.any(np.abs(g) < 1e-14):
            raise PoleError("gamma vanishes: omega is real and hits n Lambda(r)")
        n = self.n
        return self.p * n * n * (1 + self.a / (n * g) + self.b / g**2 + self.d / n**2)

    def r2k(self, omega):
        """``r^2 k``, bounded as r -> 0."""
        g = self.n * self.Lambda - complex(omega)
        if np.any(np.abs(g) < 1e-14):
            raise PoleError("gamma vanishes: omega is real and hits n Lambda(r)")
        n = self.n
        return (1 + (self.beta * self.r) ** 2) * n * n * (
            1 + self.a / (n * g) + self.b / g**2 + self.d / n**2)


def potential_coefficients(profile, beta, n, r):
    """Tabulate Lambda, a, b, d, p at ``r`` for repeated potential evaluation."""
    r = _check_radius(r)
    J = _field_jets(profile, float(beta), r, 0)
    return PotentialCoefficients(
        r=r, beta=float(beta), n=int(n), Lambda=J["Lambda"].value(), a=J["a"].value(),
        b=J["b"].value(), d=J["d"].value(), p=J["p"].value(),
    )
