"""Large-n asymptotics of ring modes.

Near the ring the potential is approximated by the quadratic
``k0 + k2 (r - r0)^2``. Decay on both sides quantizes ``k0`` and fixes the
eigenvalue expansion ``omega = n Lambda0 + i sqrt(b0) + mu_m + omega_hat``.
All inner quantities live on the rescaled variable ``xi = (r - r0) n^{3/4}``,
where ``K2 = n^{-3} k2`` no longer depends on n.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooNarrow, OutOfRegime, ValidationError
from .profiles import PotentialParams, eval_potential_k

__all__ = [
    "hermite_paper",
    "TaylorCoeffs",
    "taylor_coeffs",
    "ModeSpec",
    "mode_spec",
    "omega_asymptotic",
    "WeberMode",
    "weber_mode",
    "default_xi_grid",
    "k_err_diagnostic",
]

XI_STEP = 0.05
XI_HALF_WIDTH = 14.0


def _check_mode(n, m):
    if int(n) != n or n < 2:
        raise ValidationError("n must be an integer >= 2")
    if int(m) != m or m < 1:
        raise ValidationError("m must be a positive integer")


def hermite_paper(m, x):
    """Hermite polynomial with the index shifted by one.

    ``hermite_paper(m, x)`` equals the physicists' ``H_{m-1}(x)``, i.e.
    ``(-1)^{m-1} e^{x^2} (d/dx)^{m-1} e^{-x^2}``. Complex ``x`` is allowed.
    """
    if int(m) != m or m < 1:
        raise ValidationError("m must be a positive integer")
    x = np.asarray(x)
    h_prev = np.zeros_like(x, dtype=np.result_type(x, 1.0))
    h = np.ones_like(h_prev)
    for j in range(int(m) - 1):
        h_prev, h = h, 2 * x * h - 2 * j * h_prev
    return h


def _nu(ring):
    # K2 = i nu^4, n-independent
    return (ring.p0 * ring.Lambda2 / ring.sqrt_b0) ** 0.25


@dataclass(frozen=True)
class TaylorCoeffs:
    """Quadratic Taylor data of the potential at the ring.

    ``k2_sqrt`` is the root with positive real part and ``k0 = -(2m-1) k2_sqrt``.
    Upper-case fields are the coefficients of ``K(xi) = n^{-3/2} k(r)`` in
    ``xi = (r - r0) n^{3/4}``: ``K0 = n^{-3/2} k0`` and ``K2 = n^{-3} k2``.
    """

    n: int
    m: int
    k0: complex
    k2: complex
    k2_sqrt: complex
    K0: complex
    K2: complex
    K2_sqrt: complex
    K2_quarter: complex


def taylor_coeffs(ring, n, m=1):
    """Quadratic approximation ``k0 + k2 (r - r0)^2`` of the potential.

    Args:
        ring: RingGeometry.
        n: azimuthal wavenumber, ``n >= 2``.
        m: radial family index. Only ``k0`` depends on it.

    Returns:
        TaylorCoeffs.
    """
    _check_mode(n, m)
    nu = _nu(ring)
    n32 = float(n) ** 1.5
    K2 = 1j * nu**4
    K2_sqrt = np.exp(1j * np.pi / 4) * nu**2
    K2_quarter = np.exp(1j * np.pi / 8) * nu
    K0 = -(2 * m - 1) * K2_sqrt
    return TaylorCoeffs(
        n=int(n), m=int(m),
        k0=complex(n32 * K0), k2=complex(n32 * n32 * K2), k2_sqrt=complex(n32 * K2_sqrt),
        K0=complex(K0), K2=complex(K2), K2_sqrt=complex(K2_sqrt), K2_quarter=complex(K2_quarter),
    )


@dataclass(frozen=True)
class ModeSpec:
    """Mode labels and the frequency split ``omega = omega_app + mu_m + omega_hat``."""

    n: int
    m: int
    beta: float
    omega_app: complex
    mu_m: complex
    omega_hat: complex = 0j

    @property
    def alpha(self):
        return self.beta * self.n

    @property
    def omega(self):
        return self.omega_app + self.mu_m + self.omega_hat

    def params(self, omega=None):
        return PotentialParams(self.beta, self.n, self.omega if omega is None else omega)


def mode_spec(ring, n, m, omega_hat=0j):
    """Build the :class:`ModeSpec` of mode (n, m) on ``ring``."""
    _check_mode(n, m)
    omega_app = n * ring.Lambda0 + 1j * ring.sqrt_b0
    mu = (1 - 1j) * n**-0.5 * (2 * m - 1) * np.sqrt(ring.sqrt_b0 * ring.Lambda2 / (8 * ring.p0))
    return ModeSpec(int(n), int(m), ring.beta, complex(omega_app), complex(mu), complex(omega_hat))


def omega_asymptotic(ring, n, m):
    """Asymptotic eigenvalue ``n Lambda0 + i sqrt(b0) + mu_m``."""
    s = mode_spec(ring, n, m)
    return s.omega_app + s.mu_m


def default_xi_grid(step=XI_STEP, half_width=XI_HALF_WIDTH):
    """Uniform inner grid, symmetric about 0 and containing it."""
    N = int(round(half_width / step))
    return step * np.arange(-N, N + 1)


def _trapz_weights(x):
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


@dataclass
class WeberMode:
    """Normalized Weber function ``W_m(xi) = c_m exp(-K2^{1/2} xi^2/2) H_{m-1}(K2^{1/4} xi)``.

    Attributes:
        m: family index.
        K2_sqrt, K2_quarter: roots of K2 used in the closed form.
        xi: inner grid.
        values: samples of W_m on ``xi``.
        c_m: positive normalization constant (unit L2 norm in xi).
    """

    m: int
    K2_sqrt: complex
    K2_quarter: complex
    xi: np.ndarray
    values: np.ndarray = field(repr=False)
    c_m: float

    @property
    def K0(self):
        return -(2 * self.m - 1) * self.K2_sqrt

    @property
    def K2(self):
        return self.K2_sqrt**2

    def evaluate(self, xi, deriv=0):
        """Closed form of W_m or its first/second derivative at ``xi``."""
        xi = np.asarray(xi, dtype=float)
        s, kq = self.K2_sqrt, self.K2_quarter
        g = np.exp(-0.5 * s * xi * xi)
        z = kq * xi
        H = hermite_paper(self.m, z)
        if deriv == 0:
            return self.c_m * g * H
        # d/dz H_j = 2j H_{j-1}
        j = self.m - 1
        dH = 2 * j * hermite_paper(self.m - 1, z) if j >= 1 else 0 * z
        if deriv == 1:
            return self.c_m * g * (kq * dH - s * xi * H)
        if deriv == 2:
            # the Weber equation itself gives the second derivative
            return (self.K0 + self.K2 * xi * xi) * self.evaluate(xi)
        raise ValidationError("deriv must be 0, 1 or 2")

    def on_r(self, r, r0, n):
        """``w_m(r) = W_m((r - r0) n^{3/4})``, so ``n^{3/8} ||w_m||_{L2(dr)} = 1``."""
        return self.evaluate((np.asarray(r, dtype=float) - r0) * n**0.75)


def weber_mode(ring, n, m, xi_grid=None, tail_tol=1e-12):
    """Sample the m-th Weber function on an inner grid.

    Args:
        ring: RingGeometry.
        n: azimuthal wavenumber (only validated; the xi-profile is n-free).
        m: family index.
        xi_grid: increasing grid, default uniform with step 0.05 on [-14, 14].
        tail_tol: largest L2 mass allowed outside the grid.

    Raises:
        GridTooNarrow: if more than ``tail_tol`` of the mass lies outside.
    """
    _check_mode(n, m)
    xi = default_xi_grid() if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size < 3 or np.any(np.diff(xi) <= 0):
        raise ValidationError("xi_grid must be increasing")
    tc = taylor_coeffs(ring, n, m)
    mode = WeberMode(m=int(m), K2_sqrt=tc.K2_sqrt, K2_quarter=tc.K2_quarter, xi=xi,
                     values=None, c_m=1.0)
    raw = mode.evaluate(xi)
    norm2 = np.sum(_trapz_weights(xi) * np.abs(raw) ** 2)
    mode.c_m = float(1 / np.sqrt(norm2))
    mode.values = raw * mode.c_m
    # tail mass beyond each end, integrated on an extension of the grid
    tails = 0.0
    for edge, sgn in ((xi[0], -1.0), (xi[-1], 1.0)):
        ext = edge + sgn * np.linspace(0.0, 40.0, 8001)
        tails += np.sum(_trapz_weights(np.sort(ext)) * np.abs(mode.evaluate(np.sort(ext))) ** 2)
    if tails > tail_tol:
        raise GridTooNarrow(f"inner grid misses {tails:.2e} of the Weber mode's L2 mass")
    return mode


def k_err_diagnostic(profile, ring, n, m, omega_hat, r_samples):
    """Empirical constant of the Taylor remainder of the potential.

    Computes ``k_err = k(r) - (k0 + k2 (r-r0)^2)`` at ``omega = omega_app +
    mu_m + omega_hat``, removes the part linear in ``omega_hat``
    (``-2i n^2 p0 omega_hat / sqrt(b0)``) and returns
    ``max |k_err| / (n (1 + n^3 (r - r0)^4))`` over the samples.

    Raises:
        OutOfRegime: if ``|omega_hat| > n^{-1/2}`` or some sample has
            ``|r - r0| > n^{-1/2}``.
    """
    _check_mode(n, m)
    r = np.atleast_1d(np.asarray(r_samples, dtype=float))
    bound = n**-0.5
    if abs(omega_hat) > bound * (1 + 1e-12):
        raise OutOfRegime("|omega_hat| must not exceed n^{-1/2}")
    if np.any(np.abs(r - ring.r0) > bound * (1 + 1e-12)):
        raise OutOfRegime("samples must satisfy |r - r0| <= n^{-1/2}")
    spec = mode_spec(ring, n, m, omega_hat)
    tc = taylor_coeffs(ring, n, m)
    k = eval_potential_k(profile, spec.params(), r)
    x = r - ring.r0
    lin = -2j * n * n * ring.p0 * omega_hat / ring.sqrt_b0
    err = k - (tc.k0 + tc.k2 * x * x) - lin
    return float(np.max(np.abs(err) / (n * (1 + n**3 * x**4))))
