"""Inner-outer gluing solver for ring modes.

The eigenfunction is split as ``phi = phi_in chi_in + phi_out chi_out`` with
overlapping cutoffs around the ring. In the inner variable
``xi = (r - r0) n^{3/4}`` the inner part ``Phi_in = W + Psi`` solves a
perturbed Weber equation. Its range part is inverted in a real Hermite
function basis, with the orthogonality ``int Psi conj(W) = 0`` imposed as a
bordering row. The outer part solves ``phi'' - k~ phi = forcing`` with the
potential replaced by ``n^{3/2}`` next to the ring, which keeps the outer
operator coercive. The two are coupled through the cutoff derivatives and
iterated to a fixed point. The remaining scalar condition (the reduced
equation) fixes the eigenvalue correction ``omega_hat``. It is located by
the argument principle on a small circle and polished by the secant method.

Discretization:

* inner: uniform xi-grid (step 0.025 on [-14, 14]); Hermite functions
  ``h_j(s nu xi)`` with ``K2 = i nu^4`` and a scale s, trapezoid projections.
* outer: ``r = r0 + n^{-3/4} sinh(s)`` on a uniform s-grid, fourth-order
  central differences in s, Dirichlet ends at 0 and R_max.
* cutoff: a C-infinity smooth step between the plateaus |x| <= 1 and
  |x| >= 2, so the glued field can be differentiated spectrally.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline
from scipy.linalg import LinAlgError, lu_factor, lu_solve, solve_banded

from .asymptotics import default_xi_grid, mode_spec, taylor_coeffs, weber_mode
from .errors import (CoercivityLoss, IllConditioned, NoContraction, ValidationError,
                     WindingMultiple, WindingZero)
from .profiles import PotentialParams, potential_coefficients
from .radial import RadialField, trapz_weights

__all__ = [
    "GluingConfig",
    "GluedSolution",
    "eta",
    "hermite_functions",
    "weber_operator_matrix",
    "weber_operator_spectrum",
    "weber_overlap",
    "InnerSolver",
    "inner_projected_solve",
    "OuterSolver",
    "outer_solve",
    "coercivity_scan",
    "GluingProblem",
    "glued_fixed_point",
    "reduced_equation_solve",
]


# cutoff ---------------------------------------------------------------------

def eta(x, deriv=0):
    """Smooth cutoff: 1 on |x| <= 1, 0 on |x| >= 2, C-infinity in between.

    Between the plateaus ``eta = 1 - S(|x| - 1)`` with the smooth step
    ``S(s) = 1 / (1 + exp(1/s - 1/(1-s)))``.
    """
    x = np.asarray(x, dtype=float)
    s = np.abs(x) - 1
    mid = (s > 0) & (s < 1)
    sm = np.where(mid, s, 0.5)
    with np.errstate(over="ignore"):
        S = 1 / (1 + np.exp(1 / sm - 1 / (1 - sm)))
    if deriv == 0:
        return np.where(mid, 1 - S, np.where(s <= 0, 1.0, 0.0))
    g1 = -1 / sm**2 - 1 / (1 - sm) ** 2
    S1 = -S * (1 - S) * g1
    if deriv == 1:
        return np.where(mid, -np.sign(x) * S1, 0.0)
    if deriv == 2:
        g2 = 2 / sm**3 - 2 / (1 - sm) ** 3
        S2 = -S1 * (1 - 2 * S) * g1 - S * (1 - S) * g2
        return np.where(mid, -S2, 0.0)
    raise ValidationError("deriv must be 0, 1 or 2")


# Hermite functions ------------------------------------------------------------

def hermite_functions(x, N, derivs=False):
    """Orthonormal Hermite functions ``h_0..h_{N-1}`` at ``x``.

    Returns an array of shape ``(N, len(x))``; with ``derivs`` also the
    first derivatives and second derivatives.
    """
    x = np.asarray(x, dtype=float)
    H = np.zeros((N + 1,) + x.shape)
    H[0] = np.pi**-0.25 * np.exp(-x * x / 2)
    H[1] = np.sqrt(2) * x * H[0]
    for j in range(2, N + 1):
        H[j] = np.sqrt(2 / j) * x * H[j - 1] - np.sqrt((j - 1) / j) * H[j - 2]
    if not derivs:
        return H[:N]
    j = np.arange(N).reshape((-1,) + (1,) * x.ndim)
    dH = np.zeros((N,) + x.shape)
    dH[1:] = np.sqrt(j[1:] / 2) * H[: N - 1]
    dH -= np.sqrt((j + 1) / 2) * H[1: N + 1]
    d2H = (x * x - (2 * j + 1)) * H[:N]
    return H[:N], dH, d2H


def _x2_matrix(N):
    j = np.arange(N)
    off = np.sqrt((j[:-2] + 1) * (j[:-2] + 2)) / 2
    return np.diag(j + 0.5) + np.diag(off, 2) + np.diag(off, -2)


def weber_operator_matrix(zeta, N_h):
    """``d^2/dx^2 - e^{2 i zeta} x^2`` in the first ``N_h`` Hermite functions."""
    j = np.arange(N_h)
    return np.diag(-(2.0 * j + 1)).astype(complex) + (1 - np.exp(2j * zeta)) * _x2_matrix(N_h)


def weber_operator_spectrum(zeta, N_h=64):
    """Eigenvalues of the discretized rotated oscillator, smallest modulus first.

    The exact spectrum is ``-(2m-1) e^{i zeta}``, m = 1, 2, ...; roughly the
    first third of the returned values are resolved.
    """
    if not -np.pi / 2 < zeta < np.pi / 2:
        raise ValidationError("zeta must lie in (-pi/2, pi/2)")
    if N_h < 16:
        raise ValidationError("N_h must be at least 16")
    lam = np.linalg.eigvals(weber_operator_matrix(zeta, N_h))
    return lam[np.argsort(np.abs(lam))]


def weber_overlap(m, zeta, normalized=True, L=30.0, N=60001):
    """``int G_m(e^{i zeta/2} y)^2 dy`` for ``G_m = H_{m-1}(x) e^{-x^2/2}``.

    Computed by quadrature on the real line. With ``normalized`` it is divided
    by ``int |G_m(e^{i zeta/2} y)|^2 dy``.
    """
    from .asymptotics import hermite_paper
    y = np.linspace(-L, L, N)
    z = np.exp(0.5j * zeta) * y
    g = hermite_paper(m, z) * np.exp(-z * z / 2)
    w = trapz_weights(y)
    I = np.sum(w * g * g)
    if normalized:
        I = I / np.sum(w * np.abs(g) ** 2)
    return complex(I)


# configuration ------------------------------------------------------------------

@dataclass
class GluingConfig:
    """Scales and discretization of the gluing solver.

    ``ell_out = D_out n^{-3/4}`` and ``ell_in = n^{-3/4 + delta} / D_in``. In xi
    units the cutoff half-widths are ``D_out`` and ``n^delta / D_in``. With
    ``D_in = None`` the tightest overlap ``ell_in = 2 ell_out`` is used.

    Attributes:
        D_out, D_in, delta: cutoff scale constants.
        N_h: inner Hermite basis size.
        hermite_scale: basis functions are ``h_j(s |K2|^{1/4} xi)`` with this s.
        hs: step of the outer sinh-mapped grid.
        R_max: outer truncation radius, default ``max(10, 3 r0)``.
        fixed_point_tol: stopping threshold on successive iterate differences.
        max_iter: fixed-point iteration cap.
        D_hat: the winding contour has radius ``n^{-1/2} / D_hat``.
        n_contour: number of contour points.
        secant_tol: stopping threshold on |omega_hat| updates.
        n: if given, the overlap condition is checked at construction.
    """

    D_out: float = 1.0
    D_in: float = None
    delta: float = 0.125
    N_h: int = 256
    hermite_scale: float = 2.0
    hs: float = 0.0025
    R_max: float = None
    fixed_point_tol: float = 1e-10
    max_iter: int = 200
    D_hat: float = 32.0
    n_contour: int = 64
    secant_tol: float = 1e-13
    xi_step: float = 0.025
    xi_half_width: float = 14.0
    n: int = None

    def __post_init__(self):
        if not 0 < self.delta <= 0.125:
            raise ValidationError("delta must lie in (0, 1/8]")
        if self.D_out <= 0 or (self.D_in is not None and self.D_in <= 0):
            raise ValidationError("D_out and D_in must be positive")
        if self.N_h < 16:
            raise ValidationError("N_h must be at least 16")
        if self.n is not None:
            self.scales(self.n)

    def scales(self, n):
        """Cutoff half-widths ``(L_out, L_in)`` in xi units; checks the overlap."""
        L_out = float(self.D_out)
        L_in = 2 * L_out if self.D_in is None else n**self.delta / self.D_in
        if 2 * L_out > L_in * (1 + 1e-12):
            raise ValidationError(
                f"cutoffs do not overlap: 2 ell_out = {2 * L_out:.4g} > ell_in = {L_in:.4g} "
                "(xi units)")
        if 4 * L_in > self.xi_half_width:
            raise ValidationError("inner grid too short for the inner cutoff")
        return L_out, L_in


# inner solve --------------------------------------------------------------------

class InnerSolver:
    """Bordered Hermite-basis inverse of ``d^2/dxi^2 - (K0 + K2 xi^2)``.

    Args:
        ring: RingGeometry.
        n, m: mode labels.
        N_h: basis size.
        xi: inner grid.
    """

    def __init__(self, ring, n, m, N_h=64, xi=None, scale=1.0):
        self.xi = default_xi_grid() if xi is None else np.asarray(xi, dtype=float)
        self.tc = taylor_coeffs(ring, n, m)
        self.nu = abs(self.tc.K2_quarter) * scale
        self.N_h = N_h
        self.W = weber_mode(ring, n, m, self.xi)
        self.wq = trapz_weights(self.xi)
        self.H = hermite_functions(self.nu * self.xi, N_h)
        self.wc = self.project(self.W.values)
        j = np.arange(N_h)
        X2 = _x2_matrix(N_h)
        # d^2/dxi^2 = nu^2 (X2 - diag(2j+1)); xi^2 = X2 / nu^2
        self.L = self.nu**2 * (X2 - np.diag(2.0 * j + 1)) - self.tc.K2 * X2 / self.nu**2 \
            - self.tc.K0 * np.eye(N_h)
        B = np.zeros((N_h + 1, N_h + 1), dtype=complex)
        B[:N_h, :N_h] = self.L
        B[:N_h, N_h] = np.conj(self.wc)
        B[N_h, :N_h] = np.conj(self.wc)
        self.cond = float(np.linalg.cond(B))
        if self.cond > 1e12:
            raise IllConditioned(f"bordered inner system has condition number {self.cond:.3g}")
        self._lu = lu_factor(B)

    def project(self, f):
        """Coefficients of ``f(xi)`` in the basis ``h_j(nu xi)``."""
        return (self.H * (self.wq * f)).sum(axis=1) * self.nu

    def synthesize(self, c, xi=None, derivs=False):
        """Values (and xi-derivatives) of a coefficient vector."""
        if xi is None and not derivs:
            return self.H.T @ c
        xi = self.xi if xi is None else np.asarray(xi, dtype=float)
        if not derivs:
            return hermite_functions(self.nu * xi, self.N_h).T @ c
        H, dH, d2H = hermite_functions(self.nu * xi, self.N_h, derivs=True)
        return H.T @ c, self.nu * (dH.T @ c), self.nu**2 * (d2H.T @ c)

    def solve_coeffs(self, f):
        """Coefficients of Upsilon with ``L Upsilon = Q f`` and ``int Upsilon conj(W) = 0``."""
        sol = lu_solve(self._lu, np.concatenate([self.project(f), [0.0]]))
        return sol[: self.N_h]

    def residual(self, c, f):
        """Relative L2 residual of ``Upsilon'' - (K0 + K2 xi^2) Upsilon - Q f`` on the grid."""
        u, _, u2 = self.synthesize(c, derivs=True)
        xi = self.xi
        Wv = self.W.values
        Qf = f - np.sum(self.wq * f * Wv) * np.conj(Wv)
        res = u2 - (self.tc.K0 + self.tc.K2 * xi * xi) * u - Qf
        return float(np.sqrt(np.sum(self.wq * np.abs(res) ** 2) / np.sum(self.wq * np.abs(f) ** 2)))

    def y_norm(self, c):
        """``||F||_{H^2} + ||xi^2 F||_{L^2}``."""
        u, u1, u2 = self.synthesize(c, derivs=True)
        w = self.wq
        h2 = np.sqrt(np.sum(w * (np.abs(u) ** 2 + np.abs(u1) ** 2 + np.abs(u2) ** 2)))
        return float(h2 + np.sqrt(np.sum(w * np.abs(self.xi**2 * u) ** 2)))

    def yw_norm(self, c, q0=0.5, half_width=None):
        """Gaussian weighted norm ``||(|F''| + |xi||F'| + xi^2|F|) e^{q0 |K2|^{1/2} xi^2/sqrt 8}||``.

        With ``half_width`` the norm is taken over ``|xi| <= half_width`` only.
        Far out the weight amplifies basis truncation noise.
        """
        u, u1, u2 = self.synthesize(c, derivs=True)
        xi = self.xi
        if half_width is not None:
            keep = np.abs(xi) <= half_width
            xi, u, u1, u2 = xi[keep], u[keep], u1[keep], u2[keep]
        wt = np.exp(q0 * abs(self.tc.K2_sqrt) * xi * xi / np.sqrt(8))
        g = (np.abs(u2) + np.abs(xi) * np.abs(u1) + xi * xi * np.abs(u)) * wt
        return float(np.sqrt(np.sum(trapz_weights(xi) * g * g)))


def inner_projected_solve(ring, n, m, rhs, N_h=64, xi=None):
    """Solve the projected inner equation for a right-hand side sampled on ``xi``.

    Returns:
        RadialField in xi with the Hermite coefficients in ``meta["coeffs"]``
        and the relative residual in ``meta["residual"]``.
    """
    S = InnerSolver(ring, n, m, N_h, xi)
    f = np.asarray(rhs.values if isinstance(rhs, RadialField) else rhs, dtype=complex)
    if f.shape != S.xi.shape:
        raise ValidationError("rhs must be sampled on the inner grid")
    c = S.solve_coeffs(f)
    u, u1, _ = S.synthesize(c, derivs=True)
    fn = np.sqrt(np.sum(S.wq * np.abs(f) ** 2))
    return RadialField(S.xi, u, u1, variable="xi", meta={
        "coeffs": c, "residual": S.residual(c, f), "cond": S.cond,
        "bound_ratio": S.y_norm(c) / fn if fn > 0 else 0.0,
        "orthogonality": complex(np.sum(S.wq * u * np.conj(S.W.values))),
    })


# outer solve --------------------------------------------------------------------

def _outer_grid(ring, n, hs, R_max):
    c = n**-0.75
    sL = -np.arcsinh(ring.r0 / c)
    sR = np.arcsinh((R_max - ring.r0) / c)
    Ns = int(np.ceil((sR - sL) / hs))
    s = np.linspace(sL, sR, Ns + 1)
    r = ring.r0 + c * np.sinh(s)
    r[0] = 0.0
    r[-1] = R_max
    return s, r, c


class OuterSolver:
    """Banded fourth-order solver for ``phi'' - k~ phi = f`` with Dirichlet ends.

    ``k~ = chi~ k + (1 - chi~) n^{3/2}`` with ``chi~ = 1 - eta(xi / (L_out/2))``.
    Unknowns live on the interior plus the R_max node (where the value is 0).
    """

    def __init__(self, profile, ring, n, omega, L_out, hs=0.01, R_max=None):
        self.n, self.ring = n, ring
        self.R_max = max(10.0, 3 * ring.r0) if R_max is None else float(R_max)
        self.s, self.r_full, self.c = _outer_grid(ring, n, hs, self.R_max)
        self.hs = self.s[1] - self.s[0]
        self.r = self.r_full[1:]
        s, r = self.s[1:-1], self.r_full[1:-1]
        rs, rss = self.c * np.cosh(s), self.c * np.sinh(s)
        x = (r - ring.r0) * n**0.75
        pc = potential_coefficients(profile, ring.beta, n, r)
        k = pc.k(omega)
        chi = 1 - eta(x / (L_out / 2))
        self.k_tilde = chi * k + (1 - chi) * n**1.5
        N = len(s)
        A, B, h = 1 / rs**2, -rss / rs**3, self.hs
        c2 = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
        c1 = np.array([1, -8, 0, 8, -1]) / (12 * h)
        M = A[:, None] * c2[None, :] + B[:, None] * c1[None, :]
        M = M.astype(complex)
        M[:, 2] -= self.k_tilde
        for i in (0, N - 1):
            M[i] = 0
            M[i, 1] = A[i] / h**2 - B[i] / (2 * h)
            M[i, 2] = -2 * A[i] / h**2 - self.k_tilde[i]
            M[i, 3] = A[i] / h**2 + B[i] / (2 * h)
        ab = np.zeros((5, N), dtype=complex)
        for off in range(-2, 3):
            col = off + 2
            if off >= 0:
                ab[2 - off, off:] = M[: N - off, col]
            else:
                ab[2 - off, : N + off] = M[-off:, col]
        self._ab = ab

    def solve(self, f):
        """Solve for forcing ``f`` sampled on ``self.r`` (the last entry is ignored)."""
        try:
            u = solve_banded((2, 2), self._ab, np.asarray(f, dtype=complex)[:-1])
        except (LinAlgError, ValueError) as exc:
            raise CoercivityLoss("outer system is singular") from exc
        if not np.all(np.isfinite(u)):
            raise CoercivityLoss("outer solve produced non-finite values")
        return np.concatenate([u, [0.0]])


def outer_solve(profile, ring, params, rhs, config=None):
    """Solve the outer equation ``upsilon'' - k~ upsilon = rhs``.

    Args:
        profile, ring: base flow and ring.
        params: PotentialParams (n, omega).
        rhs: callable of r, or samples on the solver grid.
        config: GluingConfig.

    Returns:
        RadialField with ``meta["bound_constant"]`` the ratio
        ``(||u'|| + n^{3/4} ||u||) n^{3/4} / ||rhs||``.
    """
    cfg = config or GluingConfig()
    n = params.n
    L_out, _ = cfg.scales(n)
    S = OuterSolver(profile, ring, n, complex(params.omega), L_out, cfg.hs, cfg.R_max)
    f = rhs(S.r) if callable(rhs) else np.asarray(rhs, dtype=complex)
    u = S.solve(f)
    r = np.concatenate([[0.0], S.r])
    uu = np.concatenate([[0.0], u])
    ff = np.concatenate([[0.0], f])
    du = _s_derivative(S, uu)
    w = trapz_weights(r)
    fn = np.sqrt(np.sum(w * np.abs(ff) ** 2))
    nu = np.sqrt(np.sum(w * np.abs(uu) ** 2))
    ndu = np.sqrt(np.sum(w * np.abs(du) ** 2))
    C = (ndu + n**0.75 * nu) * n**0.75 / fn if fn > 0 else 0.0
    return RadialField(r, uu, du, meta={"bound_constant": float(C)})


def _s_derivative(S, u_full, order=1):
    """r-derivatives of a field on the full sinh grid by quintic splines in s."""
    spl = make_interp_spline(S.s, u_full, k=5)
    rs = S.c * np.cosh(S.s)
    d1 = spl(S.s, 1) / rs
    if order == 1:
        return d1
    rss = S.c * np.sinh(S.s)
    return d1, spl(S.s, 2) / rs**2 - rss / rs**3 * spl(S.s, 1)


def coercivity_scan(profile, ring, n, omega, config=None, A_values=None):
    """Find A with ``Re k~ + A Im k~ >= c p n^{3/2}`` on the outer grid.

    Returns ``(A, c)`` maximizing the worst-case ratio ``c`` over the scan.
    """
    cfg = config or GluingConfig()
    L_out, _ = cfg.scales(n)
    S = OuterSolver(profile, ring, n, omega, L_out, cfg.hs, cfg.R_max)
    r = S.r_full[1:-1]
    p = (1 + (ring.beta * r) ** 2) / r**2
    A_values = np.arange(1, 65) if A_values is None else np.asarray(A_values, dtype=float)
    best = (None, -np.inf)
    for A in A_values:
        c = np.min((S.k_tilde.real + A * S.k_tilde.imag) / (p * n**1.5))
        if c > best[1]:
            best = (float(A), float(c))
    return best


# glued system ---------------------------------------------------------------------

@dataclass
class GluedSolution:
    """Result of the gluing construction.

    Attributes:
        Psi: inner remainder on the xi-grid (coefficients in ``meta``).
        phi_out: outer field on the r-grid.
        omega_hat, omega: eigenvalue correction and full eigenvalue.
        norms: ``(||Psi||_{Y_w}, ||phi_out||_Z)``, the first over the support
            of the inner cutoff.
        reduced_residual: ``|reduced equation|`` at omega_hat.
        contraction: measured fixed-point contraction factor.
        iterations: fixed-point iterations at the final omega_hat.
        winding: winding number on the contour.
        contour_radius: its radius.
        orthogonality: ``|int Psi conj(W)|``.
        pde_residual: relative residual of the assembled glued eigenfunction.
    """

    Psi: RadialField = field(repr=False)
    phi_out: RadialField = field(repr=False)
    omega_hat: complex
    omega: complex
    norms: tuple
    reduced_residual: float
    contraction: float
    iterations: int
    winding: int = None
    contour_radius: float = None
    orthogonality: float = None
    pde_residual: float = None
    n: int = None
    m: int = None

    def summary(self):
        return {
            "omega": [self.omega.real, self.omega.imag],
            "omega_hat": [self.omega_hat.real, self.omega_hat.imag],
            "norms": list(self.norms),
            "reduced_residual": self.reduced_residual,
            "contraction": self.contraction,
            "iterations": self.iterations,
            "winding": self.winding,
            "contour_radius": self.contour_radius,
            "orthogonality": self.orthogonality,
            "pde_residual": self.pde_residual,
            "n": self.n, "m": self.m,
        }


@dataclass
class _FixedPoint:
    omega_hat: complex
    psi_c: np.ndarray
    phi_out: np.ndarray
    reduced: complex
    history: list
    contraction: float
    ortho_max: float


class GluingProblem:
    """All omega-independent pieces of the glued system for one mode."""

    def __init__(self, profile, ring, n, m, config=None):
        self.cfg = cfg = config or GluingConfig()
        self.profile, self.ring, self.n, self.m = profile, ring, int(n), int(m)
        self.L_out, self.L_in = cfg.scales(n)
        self.spec = mode_spec(ring, n, m)
        xi = default_xi_grid(cfg.xi_step, cfg.xi_half_width)
        self.inner = InnerSolver(ring, n, m, cfg.N_h, xi, cfg.hermite_scale)
        self.xi = xi
        n34 = n**0.75
        self.n34 = n34
        # inner-grid cutoffs (xi units)
        self.Xt_in = eta(xi / (2 * self.L_in))
        self.dX_out = -eta(xi / self.L_out, 1) / self.L_out
        self.d2X_out = -eta(xi / self.L_out, 2) / self.L_out**2
        r_in = ring.r0 + xi / n34
        self._r_in = r_in
        self._inner_ok = r_in > 0
        self._pc_in = potential_coefficients(profile, ring.beta, n, np.where(self._inner_ok, r_in, 1.0))
        # outer grid and the inner cutoff seen from it (r units)
        self.R_max = max(10.0, 3 * ring.r0) if cfg.R_max is None else float(cfg.R_max)
        self.s, self.r_full, self.c = _outer_grid(ring, n, cfg.hs, self.R_max)
        self.r_out = self.r_full[1:]
        xo = (self.r_out - ring.r0) * n34
        self.dX_in_o = eta(xo / self.L_in, 1) / self.L_in * n34
        self.d2X_in_o = eta(xo / self.L_in, 2) / self.L_in**2 * n34**2
        self.near = np.abs(xo) <= 2 * self.L_in + 1e-12
        Hn, dHn, _ = hermite_functions(self.inner.nu * xo[self.near], cfg.N_h, derivs=True)
        self._H_near, self._dH_near = Hn, dHn
        self._cache = {}

    def omega(self, omega_hat):
        return self.spec.omega_app + self.spec.mu_m + omega_hat

    def K_err(self, omega_hat):
        tc = self.inner.tc
        K = np.zeros(self.xi.shape, dtype=complex)
        K[self._inner_ok] = self._pc_in.k(self.omega(omega_hat))[self._inner_ok] / self.n**1.5
        return np.where(self._inner_ok, K - (tc.K0 + tc.K2 * self.xi**2), 0.0)

    def _forcing_outer(self, c):
        tot = c + self.inner.wc
        v = self._H_near.T @ tot
        dv = (self._dH_near.T @ tot) * self.inner.nu * self.n34
        out = np.zeros(len(self.r_out), dtype=complex)
        near = self.near
        out[near] = -2 * dv * self.dX_in_o[near] - v * self.d2X_in_o[near]
        return out

    def _inner_forcing(self, Ke, c, phio):
        cs = CubicSpline(self.r_full, np.concatenate([[0.0], phio]))
        r_in = np.clip(self._r_in, 0.0, None)
        Po = cs(r_in)
        dPo = cs(r_in, 1) / self.n34
        Wv = self.inner.W.values
        return self.Xt_in * Ke * (Wv + self.inner.synthesize(c)) - Po * self.d2X_out \
            - 2 * dPo * self.dX_out

    def fixed_point(self, omega_hat, start=None):
        """Iterate the projected system at fixed ``omega_hat``."""
        key = complex(omega_hat)
        if key in self._cache:
            return self._cache[key]
        cfg = self.cfg
        om = self.omega(omega_hat)
        Ke = self.K_err(omega_hat)
        outer = OuterSolver(self.profile, self.ring, self.n, om, self.L_out, cfg.hs, self.R_max)
        Nh = cfg.N_h
        if start is None:
            c, phio = np.zeros(Nh, dtype=complex), np.zeros(len(self.r_out), dtype=complex)
        else:
            c, phio = start.psi_c.copy(), start.phi_out.copy()
        hist = []
        ortho = 0.0
        grow = 0
        for it in range(cfg.max_iter):
            G = self._inner_forcing(Ke, c, phio)
            c_new = self.inner.solve_coeffs(G)
            phio_new = outer.solve(self._forcing_outer(c))
            diff = np.linalg.norm(c_new - c) + np.linalg.norm(phio_new - phio)
            c, phio = c_new, phio_new
            ortho = max(ortho, abs(np.sum(np.conj(self.inner.wc) * c)) / self.inner.nu)
            hist.append(diff)
            # growth below the round-off floor is noise
            if len(hist) >= 2 and hist[-1] > hist[-2] and hist[-1] > 100 * cfg.fixed_point_tol:
                grow += 1
                if grow >= 2:
                    raise NoContraction("fixed-point iterates grew twice in a row")
            else:
                grow = 0
            if diff < cfg.fixed_point_tol:
                break
        else:
            raise NoContraction(f"fixed point not reached in {cfg.max_iter} iterations")
        G = self._inner_forcing(Ke, c, phio)
        red = complex(np.sum(self.inner.wq * G * self.inner.W.values))
        ratios = [hist[i + 1] / hist[i] for i in range(len(hist) - 1) if hist[i] > 0]
        # asymptotic rate, ignoring the transient and the round-off floor
        tail = [q for q, h in zip(ratios, hist[1:]) if h > 1e3 * cfg.fixed_point_tol]
        contraction = float(np.median(tail[-10:] if tail else ratios)) if ratios else 0.0
        fp = _FixedPoint(complex(omega_hat), c, phio, red, hist, contraction, float(ortho))
        self._cache[key] = fp
        return fp

    def reduced(self, omega_hat):
        return self.fixed_point(omega_hat).reduced

    def winding(self, radius=None, n_points=None):
        """Winding number of the reduced function on ``|omega_hat| = radius``."""
        cfg = self.cfg
        radius = self.n**-0.5 / cfg.D_hat if radius is None else radius
        n_points = cfg.n_contour if n_points is None else n_points
        z = radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
        f = np.array([self.reduced(zz) for zz in z])
        dphase = np.angle(np.roll(f, -1) / f)
        return int(round(np.sum(dphase) / (2 * np.pi))), z, f

    def assemble(self, fp, xi_eval=None):
        """Glued eigenfunction ``phi = Phi_in chi_in + phi_out chi_out`` on the outer grid."""
        n34 = self.n34
        r = self.r_full
        x = (r - self.ring.r0) * n34
        S = type("S", (), {})()
        S.s, S.c = self.s, self.c
        po = np.concatenate([[0.0], fp.phi_out])
        po1, po2 = _s_derivative(S, po, order=2)
        tot = fp.psi_c + self.inner.wc
        inside = np.abs(x) <= 2 * self.L_in
        pin = np.zeros_like(po)
        pin1 = np.zeros_like(po)
        pin2 = np.zeros_like(po)
        v, v1, v2 = self.inner.synthesize(tot, x[inside], derivs=True)
        pin[inside], pin1[inside], pin2[inside] = v, v1 * n34, v2 * n34**2
        ci = eta(x / self.L_in)
        ci1 = eta(x / self.L_in, 1) * n34 / self.L_in
        ci2 = eta(x / self.L_in, 2) * n34**2 / self.L_in**2
        co = 1 - eta(x / self.L_out)
        co1 = -eta(x / self.L_out, 1) * n34 / self.L_out
        co2 = -eta(x / self.L_out, 2) * n34**2 / self.L_out**2
        phi = pin * ci + po * co
        phi2 = pin2 * ci + 2 * pin1 * ci1 + pin * ci2 + po2 * co + 2 * po1 * co1 + po * co2
        return r, phi, phi2

    def pde_residual(self, fp):
        """``||phi'' - k phi|| / (n^{3/2} ||phi||)`` on the outer grid (r > 0)."""
        r, phi, phi2 = self.assemble(fp)
        r, phi, phi2 = r[1:], phi[1:], phi2[1:]
        k = potential_coefficients(self.profile, self.ring.beta, self.n, r).k(self.omega(fp.omega_hat))
        w = trapz_weights(r)
        res = np.sqrt(np.sum(w * np.abs(phi2 - k * phi) ** 2))
        return float(res / (self.n**1.5 * np.sqrt(np.sum(w * np.abs(phi) ** 2))))

    def solution(self, fp, winding=None, radius=None):
        inner = self.inner
        u, u1, _ = inner.synthesize(fp.psi_c, derivs=True)
        Psi = RadialField(self.xi, u, u1, variable="xi", meta={"coeffs": fp.psi_c})
        r = self.r_full
        po = np.concatenate([[0.0], fp.phi_out])
        S = type("S", (), {})()
        S.s, S.c = self.s, self.c
        dpo = _s_derivative(S, po)
        phi_out = RadialField(r, po, dpo)
        w = trapz_weights(r)
        z = self.n**-0.375 * np.sqrt(np.sum(w * np.abs(dpo) ** 2)) \
            + self.n**0.375 * np.sqrt(np.sum(w * np.abs(po) ** 2))
        return GluedSolution(
            Psi=Psi, phi_out=phi_out, omega_hat=fp.omega_hat, omega=self.omega(fp.omega_hat),
            norms=(inner.yw_norm(fp.psi_c, half_width=2 * self.L_in), float(z)), reduced_residual=abs(fp.reduced),
            contraction=fp.contraction, iterations=len(fp.history), winding=winding,
            contour_radius=radius, orthogonality=fp.ortho_max,
            pde_residual=self.pde_residual(fp), n=self.n, m=self.m,
        )


def glued_fixed_point(profile, ring, n, m, omega_hat=0j, config=None):
    """Solve the projected system at fixed ``omega_hat``.

    Returns:
        GluedSolution (``winding`` unset; ``reduced_residual`` is the value of
        the reduced equation, nonzero away from the eigenvalue).

    Raises:
        NoContraction: iterates grew on two consecutive steps.
    """
    prob = GluingProblem(profile, ring, n, m, config)
    return prob.solution(prob.fixed_point(omega_hat))


def reduced_equation_solve(profile, ring, n, m, config=None, problem=None):
    """Find ``omega_hat`` from the reduced equation.

    The root is counted by the argument principle on ``|omega_hat| = R0``
    and polished by the secant method.

    Raises:
        WindingZero: no root inside the contour.
        WindingMultiple: more than one root inside.
    """
    prob = problem or GluingProblem(profile, ring, n, m, config)
    cfg = prob.cfg
    R0 = n**-0.5 / cfg.D_hat
    wnum, z, f = prob.winding(R0)
    if wnum == 0:
        raise WindingZero(f"no root of the reduced equation in |omega_hat| <= {R0:.3g}")
    if wnum > 1:
        raise WindingMultiple(f"{wnum} roots of the reduced equation in |omega_hat| <= {R0:.3g}")
    # secant from the centre and a nearby point
    a, b = 0j, 0.1 * R0 + 0j
    fa, fb = prob.reduced(a), prob.reduced(b)
    for _ in range(60):
        if fb == fa:
            break
        c = b - fb * (b - a) / (fb - fa)
        a, fa = b, fb
        b = c
        fb = prob.fixed_point(b, start=prob.fixed_point(a)).reduced
        if abs(b - a) < cfg.secant_tol:
            break
    else:
        raise WindingZero("secant iteration for omega_hat did not converge")
    if abs(b) > R0:
        raise WindingMultiple("secant root left the winding contour")
    # a cold start at the root gives an honest contraction estimate
    prob._cache.pop(complex(b), None)
    fp = prob.fixed_point(b)
    return prob.solution(fp, winding=wnum, radius=R0)
