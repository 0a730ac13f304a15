"""Classical stability and instability criteria for vortex columns.

All scans run on a geometric grid of ``10**4`` points on ``[1e-3, 50]``;
interior extrema are refined by bounded scalar minimization.

Sign conventions follow the rest of the package: perturbations go like
``exp(i(alpha z - n theta))`` with ``beta = alpha / n``. The Howard-Gupta
expressions are classically written for ``exp(i(alpha z + n theta))``; they
are evaluated here after the substitution ``n -> -n`` (so ``beta -> -beta``),
and the pointwise criterion uses the axial shear ``alpha W'``. In this form
the Batchelor specialization reduces to
``-4 q beta n^2 (1 - beta q) (1 - e^{-r^2}) e^{-r^2} / r^2 - n^2 Lambda'^2 / 4``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NegativeBound, ValidationError
from .profiles import BatchelorProfile

__all__ = [
    "R_MIN",
    "R_SCAN",
    "N_SCAN",
    "scan_grid",
    "base_fields",
    "Semicircle",
    "semicircle",
    "howard_gupta_pointwise",
    "howard_gupta_batchelor",
    "howard_gupta_integrand",
    "howard_gupta_growth_bound",
    "ls_sufficient_condition",
    "rayleigh_phi_sign",
    "criteria_report",
]

R_MIN = 1e-3
R_SCAN = 50.0
N_SCAN = 10_000


def scan_grid(r_min=R_MIN, r_max=R_SCAN, n=N_SCAN):
    """Geometric scan grid on ``[r_min, r_max]``."""
    if not 0 < r_min < r_max:
        raise ValidationError("need 0 < r_min < r_max")
    return np.geomspace(r_min, r_max, int(n))


def base_fields(profile, r):
    """Values and derivatives of the base flow needed by the criteria.

    Returns a dict with ``Omega, dOmega, V, dV, W, dW, Gamma, dGamma, Phi``.
    """
    r = np.asarray(r, dtype=float)
    J = profile.jets(r, 2)
    Om, W, G = J["Omega"], J["W"], J["Gamma"]
    Gv, Gp = G.value(), G.derivative(1)
    return {
        "Omega": Om.value(), "dOmega": Om.derivative(1),
        "V": r * Om.value(), "dV": Gp / r - Gv / r**2,
        "W": W.value(), "dW": W.derivative(1),
        "Gamma": Gv, "dGamma": Gp,
        "Phi": 2 * Gv * Gp / r**3,
    }


def _refine(func, r, vals, mode):
    """Refine the grid extremum of ``func`` by a bounded local search."""
    i = int(np.argmax(vals) if mode == "max" else np.argmin(vals))
    best_r, best = r[i], vals[i]
    if 0 < i < len(r) - 1:
        sgn = -1.0 if mode == "max" else 1.0
        res = minimize_scalar(lambda x: sgn * float(func(np.array([x]))[0]),
                              bounds=(r[i - 1], r[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * r[i]})
        v = sgn * res.fun
        if (mode == "max" and v > best) or (mode == "min" and v < best):
            best_r, best = float(res.x), v
    return float(best_r), float(best)


@dataclass
class Semicircle:
    """Disc ``B(omega0, omega_max)`` containing all unstable eigenvalues.

    Attributes:
        omega0: real centre.
        omega_max: radius.
        Rtilde_max: maximum of R~ over the scan.
        Lambda_min, Lambda_max: extrema of Lambda used for the centre.
        r_Rtilde: radius where R~ peaks.
    """

    omega0: float
    omega_max: float
    Rtilde_max: float
    Lambda_min: float
    Lambda_max: float
    r_Rtilde: float = None
    n: int = None

    def contains(self, omega, margin=0.0):
        """True if ``omega`` lies in the open upper half-disc, ``margin`` inside."""
        omega = complex(omega)
        return omega.imag > 0 and abs(omega - self.omega0) < self.omega_max - margin

    def boundary(self, n_points=200):
        """Upper half of the circle as an array of complex points."""
        t = np.linspace(0, np.pi, n_points)
        return self.omega0 + self.omega_max * np.exp(1j * t)

    def summary(self):
        return {
            "omega0": self.omega0, "omega_max": self.omega_max,
            "Rtilde_max": self.Rtilde_max, "r_Rtilde": self.r_Rtilde,
            "Lambda_min": self.Lambda_min, "Lambda_max": self.Lambda_max, "n": self.n,
        }


def _rtilde(profile, r, dL):
    f = base_fields(profile, r)
    s = r * f["Omega"] * f["dOmega"]
    # taken literally: R~^2 = ((r Om Om')^2 + Om^2 dL^2)^{1/2} - r Om Om'
    R2 = np.sqrt(s * s + f["Omega"] ** 2 * dL**2) - s
    return np.sqrt(np.maximum(R2, 0.0))


def semicircle(profile, ring, n, beta=None, r_grid=None):
    """Barston semicircle for wavenumbers ``(n, alpha = beta n)``.

    For the Batchelor vortex ``sup Lambda = 0`` is attained only as
    ``r -> infinity`` and is used analytically.

    Args:
        profile: base flow.
        ring: RingGeometry supplying beta (ignored if ``beta`` is given).
        n: azimuthal wavenumber.
        beta: optional override of the wavenumber ratio.
        r_grid: optional scan grid.
    """
    beta = ring.beta if beta is None else float(beta)
    r = scan_grid() if r_grid is None else np.asarray(r_grid, dtype=float)

    def lam(x):
        f = base_fields(profile, x)
        return beta * f["W"] - f["Omega"]

    L = lam(r)
    _, Lmin = _refine(lam, r, L, "min")
    _, Lmax = _refine(lam, r, L, "max")
    if isinstance(profile, BatchelorProfile):
        Lmax = max(Lmax, 0.0)
    dL = Lmax - Lmin

    def rt(x):
        return _rtilde(profile, x, dL)

    r_R, Rmax = _refine(rt, r, rt(r), "max")
    omega0 = 0.5 * n * (Lmin + Lmax)
    omega_max = float(np.sqrt(0.25 * n * n * dL * dL + Rmax * Rmax))
    return Semicircle(float(omega0), omega_max, Rmax, float(Lmin), float(Lmax), r_R, int(n))


def howard_gupta_pointwise(profile, n, alpha, r):
    """Pointwise Howard-Gupta expression; the flow is certified stable if it is >= 0 everywhere.

    ``alpha^2 Phi + (2 alpha n / r^2) V W' - (alpha W' - n Omega')^2 / 4``,
    i.e. the classical expression after ``n -> -n``.
    """
    f = base_fields(profile, np.asarray(r, dtype=float))
    r = np.asarray(r, dtype=float)
    return alpha**2 * f["Phi"] + 2 * alpha * n / r**2 * f["V"] * f["dW"] \
        - 0.25 * (alpha * f["dW"] - n * f["dOmega"]) ** 2


def howard_gupta_batchelor(q, beta, r, n=1):
    """Closed form of :func:`howard_gupta_pointwise` for the Batchelor vortex at ``alpha = beta n``."""
    r = np.asarray(r, dtype=float)
    e = np.exp(-r * r)
    om1 = 1 - e
    # Lambda' = -2 beta r e - q (2 r^2 e - 2 om1) / r^3
    dLam = -2 * beta * r * e - q * (2 * r * r * e - 2 * om1) / r**3
    return n * n * (-4 * q * beta * (1 - beta * q) * om1 * e / r**2 - 0.25 * dLam**2)


def howard_gupta_integrand(profile, beta, r):
    """Bracketed growth-rate integrand, after ``beta -> -beta``.

    ``beta^2 r^2/(1 + beta^2 r^2) (W'^2/4 - Phi - W'(r^3 V)'/(2 beta r^4) + Omega'^2/beta^2)``.
    """
    r = np.asarray(r, dtype=float)
    f = base_fields(profile, r)
    b2 = beta * beta
    r3V = 2 * r * f["Gamma"] + r * r * f["dGamma"]
    br = 0.25 * f["dW"] ** 2 - f["Phi"] - f["dW"] * r3V / (2 * beta * r**4) + f["dOmega"] ** 2 / b2
    return b2 * r * r / (1 + b2 * r * r) * br


def howard_gupta_growth_bound(profile, ring, n=None, beta=None, r_grid=None):
    """Upper bound on ``Im omega`` for any unstable mode at wavenumber ratio beta.

    The bound depends on ``beta`` only; ``n`` is accepted for symmetry with
    the other criteria.

    Raises:
        NegativeBound: if the maximal integrand is negative (no unstable mode).
    """
    beta = ring.beta if beta is None else float(beta)
    if beta == 0:
        raise ValidationError("beta must be nonzero")
    r = scan_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    func = lambda x: howard_gupta_integrand(profile, beta, x)
    _, vmax = _refine(func, r, func(r), "max")
    if vmax < 0:
        raise NegativeBound(f"growth bound integrand is negative everywhere (max {vmax:.3g})")
    return float(np.sqrt(vmax))


def ls_sufficient_condition(profile, r_scan=None):
    """Scan ``V Omega' (Omega' Gamma' + W'^2)`` for negative values.

    Returns:
        dict with ``violated_somewhere``, ``witness_r`` (the most negative
        point or None) and ``min_value``.
    """
    r = scan_grid() if r_scan is None else np.asarray(r_scan, dtype=float)
    f = base_fields(profile, r)
    val = f["V"] * f["dOmega"] * (f["dOmega"] * f["dGamma"] + f["dW"] ** 2)
    i = int(np.argmin(val))
    bad = bool(val[i] < 0)
    return {"violated_somewhere": bad, "witness_r": float(r[i]) if bad else None,
            "min_value": float(val[i])}


def rayleigh_phi_sign(profile, r_scan=None):
    """Minimum of the Rayleigh function ``Phi = (Gamma^2)' / r^3`` on the scan.

    ``Phi >= 0`` everywhere is equivalent to spectral stability against
    axisymmetric perturbations.
    """
    r = scan_grid() if r_scan is None else np.asarray(r_scan, dtype=float)
    phi = base_fields(profile, r)["Phi"]
    i = int(np.argmin(phi))
    ok = bool(phi[i] >= 0)
    text = ("Phi >= 0 on the scan: stable to axisymmetric perturbations" if ok else
            "Phi < 0 somewhere: unstable to axisymmetric perturbations")
    return {"nonnegative_everywhere": ok, "min_value": float(phi[i]),
            "witness_r": None if ok else float(r[i]), "interpretation": text}


def criteria_report(profile, ring, n, modes=()):
    """All criteria for one configuration, plus containment checks of ``modes``."""
    sc = semicircle(profile, ring, n)
    r = scan_grid()
    hg = howard_gupta_pointwise(profile, n, ring.beta * n, r)
    try:
        bound = howard_gupta_growth_bound(profile, ring, n)
    except NegativeBound:
        bound = None
    out = {
        "semicircle": sc.summary(),
        "sqrt_b0": ring.sqrt_b0,
        "sqrt_b0_below_Rtilde_max": bool(ring.sqrt_b0 < sc.Rtilde_max),
        "howard_gupta": {"max_lhs": float(np.max(hg)),
                         "violated_everywhere": bool(np.all(hg < 0))},
        "growth_bound": bound,
        "leibovich_stewartson": ls_sufficient_condition(profile, r),
        "rayleigh_phi": rayleigh_phi_sign(profile, r),
        "modes": [],
    }
    for om in modes:
        om = complex(om)
        out["modes"].append({
            "omega": [om.real, om.imag],
            "in_semicircle": sc.contains(om, 1e-6),
            "below_growth_bound": bound is not None and om.imag <= bound,
        })
    return out
