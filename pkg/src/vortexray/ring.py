"""Location of the concentration ring (r0, beta).

The ring is the joint critical point of ``Lambda`` and ``b``:
``Lambda'(r0) = 0`` and ``b'(r0) = 0``. For the Batchelor vortex both
conditions reduce to scalar equations,

    e^{r^2} = 1 + r^2 + beta r^4 / q            (Lambda' = 0)
    g(r) = beta^2,  g = (1 - 2e^{-r^2}) / (r^2 (2e^{-r^2} - 1) + e^{-r^2} - 1)

which are solved by a nested scalar iteration. General profiles use a damped
two-dimensional Newton iteration.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import AssumptionViolated, ConvergenceFailure, NoRing, ValidationError
from .profiles import BatchelorProfile, eval_fields

__all__ = ["RingGeometry", "locate_batchelor", "locate_general", "ring_from_point"]

_EPS_GUARD = 1e-6


@dataclass
class RingGeometry:
    """Ring data that parametrizes the asymptotics.

    Attributes:
        r0: ring radius.
        beta: wavenumber ratio alpha / n.
        b0, Lambda0, Lambda2, p0, a0: b, Lambda, Lambda'', p and a at r0.
        residuals: (|Lambda'(r0)|, |b'(r0)|).
        profile: the profile the ring belongs to.
    """

    r0: float
    beta: float
    b0: float
    Lambda0: float
    Lambda2: float
    p0: float
    a0: float
    residuals: tuple
    profile: object = field(default=None, repr=False, compare=False)

    @property
    def sqrt_b0(self):
        return float(np.sqrt(self.b0))

    def to_dict(self):
        return {
            "r0": self.r0, "beta": self.beta, "b0": self.b0,
            "Lambda0": self.Lambda0, "Lambda2": self.Lambda2,
            "p0": self.p0, "a0": self.a0,
            "residuals": [float(x) for x in self.residuals],
        }


def ring_from_point(profile, r0, beta, check=True):
    """Assemble a :class:`RingGeometry` at a given (r0, beta).

    Raises:
        AssumptionViolated: if ``check`` and b0 <= 0 or Lambda'' <= 0.
    """
    fb = eval_fields(profile, beta, np.array([r0]))
    ring = RingGeometry(
        r0=float(r0), beta=float(beta), b0=float(fb.b[0]),
        Lambda0=float(fb.Lambda[0]), Lambda2=float(fb.dLambda[1][0]),
        p0=float(fb.p[0]), a0=float(fb.a[0]),
        residuals=(abs(float(fb.dLambda[0][0])), abs(float(fb.db[0][0]))),
        profile=profile,
    )
    if check:
        if not ring.b0 > 0:
            raise AssumptionViolated("b0", f"b(r0) = {ring.b0} is not positive")
        if not ring.Lambda2 > 0:
            raise AssumptionViolated("Lambda2", f"Lambda''(r0) = {ring.Lambda2} is not positive")
    return ring


def _s(x):
    """(e^x - 1 - x) / x^2, increasing and convex on x > 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1.0
    xs = np.where(small, x, 0.0)
    term = np.full_like(xs, 0.5)
    acc = term.copy()
    for j in range(1, 25):
        term = term * xs / (j + 2)
        acc = acc + term
    xl = np.where(small, 1.0, x)
    return np.where(small, acc, (np.expm1(xl) - xl) / xl**2)


def _ds(x):
    # derivative of s: (e^x - 1)/x^2 - 2 s(x)/x
    x = np.asarray(x, dtype=float)
    return np.expm1(x) / x**2 - 2 * _s(x) / x


def _inner_radius(beta, q, max_iter=200):
    """Positive root r of e^{r^2} = 1 + r^2 + beta r^4 / q, vectorized in beta.

    In ``x = r^2`` the equation reads ``s(x) = beta/q`` with ``s`` convex and
    increasing from 1/2, so a root exists exactly when beta > q/2 and Newton
    started to the right of it decreases monotonically onto it.
    """
    c = np.asarray(beta, dtype=float) / q
    if np.any(c <= 0.5):
        raise ValidationError("inner ring equation has no positive root for beta <= q/2")
    x = np.ones_like(c)
    for _ in range(60):
        low = _s(x) <= c
        if not np.any(low):
            break
        x = np.where(low, 2 * x, x)
    else:
        raise ConvergenceFailure("cannot bracket the inner ring equation")
    for _ in range(max_iter):
        step = (_s(x) - c) / _ds(x)
        # monotone from the right; a negative step is round-off noise
        step = np.maximum(step, 0.0)
        x = x - step
        if np.all(step <= 4e-16 * x):
            return np.sqrt(x)
    raise ConvergenceFailure("inner ring Newton iteration did not converge")


def _g(r):
    e = np.exp(-r * r)
    return (1 - 2 * e) / (r * r * (2 * e - 1) + e - 1)


def locate_batchelor(q, n_scan=400, tol=1e-15, max_iter=200):
    """Ring of the Batchelor vortex.

    Outer root finding on ``beta in (q/2, 1/q)`` of ``g(r0(beta)) - beta^2``,
    where ``r0(beta)`` solves the Lambda' = 0 equation.

    Args:
        q: swirl parameter, ``0 < q < sqrt(2)``.
        n_scan: number of beta samples used to bracket the root.

    Returns:
        RingGeometry.

    Raises:
        NoRing: no sign change in the admissible interval.
        ConvergenceFailure: root polishing failed.
    """
    q = float(q)
    if not 0 < q < np.sqrt(2):
        raise ValidationError("q must lie in (0, sqrt(2))")
    lo, hi = q / 2 * (1 + _EPS_GUARD), 1 / q * (1 - _EPS_GUARD)

    def G(beta):
        return _g(_inner_radius(beta, q)) - beta * beta

    betas = np.linspace(lo, hi, n_scan)
    vals = G(betas)
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if sign_change.size == 0:
        raise NoRing(f"no ring for q = {q}: ring condition has no sign change")
    i = sign_change[0]
    try:
        beta = brentq(lambda b: float(G(b)), betas[i], betas[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps,
                      maxiter=max_iter)
    except RuntimeError as exc:  # pragma: no cover - brentq raises on maxiter
        raise ConvergenceFailure(str(exc)) from exc
    r0 = float(_inner_radius(beta, q))
    return ring_from_point(BatchelorProfile(q), r0, beta)


def _residual_vec(profile, r, beta):
    fb = eval_fields(profile, beta, np.array([r]))
    return np.array([fb.dLambda[0][0], fb.db[0][0]])


def check_single_level(profile, ring, r_max=20.0, n=10_000, tol=1e-10):
    """True if Lambda(r) = Lambda(r0) has no solution away from r0 on a grid."""
    r_range = getattr(profile, "r_range", None)
    if r_range is not None:
        r_max = min(r_max, r_range[1])
    r = np.linspace(1e-3, r_max, n)
    # only Lambda is used; q and b may be 0/0 where tabulated data flatten out
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = eval_fields(profile, ring.beta, r).Lambda - ring.Lambda0
    away = np.abs(r - ring.r0) > 0.05 * max(ring.r0, 1.0)
    lam = lam[away]
    crossings = np.count_nonzero(np.sign(lam[:-1]) * np.sign(lam[1:]) < 0)
    return crossings == 0 and not np.any(np.abs(lam) < tol)


def locate_general(profile, seed, tol=1e-11, max_iter=100, fd_step=1e-6, grid_check=True):
    """Ring of a general profile by damped Newton on (Lambda', b').

    Args:
        profile: any :class:`VortexProfile`.
        seed: initial guess ``(r, beta)``.
        tol: target for both residuals.

    Returns:
        RingGeometry.

    Raises:
        ConvergenceFailure: Newton stalled or ran out of iterations.
        AssumptionViolated: b0 <= 0 or Lambda'' <= 0 at the converged point.
    """
    x = np.array(seed, dtype=float)
    if x.shape != (2,) or not np.all(x > 0):
        raise ValidationError("seed must be a pair (r, beta) of positive numbers")
    F = _residual_vec(profile, *x)
    for _ in range(max_iter):
        if np.all(np.abs(F) < tol):
            break
        J = np.empty((2, 2))
        for j in range(2):
            h = fd_step * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            J[:, j] = (_residual_vec(profile, *xp) - _residual_vec(profile, *xm)) / (2 * h)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure("singular Jacobian in ring Newton") from exc
        lam = 1.0
        norm0 = np.linalg.norm(F)
        while True:
            xt = x + lam * dx
            if np.all(xt > 0):
                Ft = _residual_vec(profile, *xt)
                if np.linalg.norm(Ft) < (1 - 1e-4 * lam) * norm0 or lam < 1e-6:
                    break
            lam *= 0.5
            if lam < 1e-6:
                raise ConvergenceFailure("line search failed in ring Newton")
        x, F = xt, Ft
    else:
        raise ConvergenceFailure("ring Newton did not converge")
    ring = ring_from_point(profile, x[0], x[1])
    if grid_check and not check_single_level(profile, ring):
        warnings.warn("Lambda takes the value Lambda(r0) away from r0 on the check grid",
                      RuntimeWarning, stacklevel=2)
    return ring
