"""Two-sided shooting for the Rayleigh eigenvalue problem ``phi'' = k(r; omega) phi``.

The equation is integrated in ``t = ln r`` for ``psi = r^{-1/2} phi``, which
satisfies ``psi_tt = Q psi`` with ``Q = 1/4 + r^2 k``. ``Q`` is bounded as
``r -> 0`` and the recessive solution there starts from ``psi_t = sqrt(Q) psi``.
Each step applies a sixth-order Magnus propagator (exact 2x2 matrix
exponential), and states are renormalized after every step so the log of
the amplitude is carried separately. The grid equidistributes a density
built from the local wavenumber ``|k|^{1/2}``, the ring scale ``n^{3/4}`` and
``1/r``; the number of nodes is doubled until the Richardson estimate of
the matching error drops below ``ode_tol``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import mode_spec, weber_mode
from .errors import (LeftSemicirclePlane, NoConvergence, SeedEscape, StiffnessError,
                     ValidationError)
from .jets import Jet
from .profiles import PotentialParams, eval_fields, potential_coefficients
from .radial import RadialField, trapz_weights

__all__ = [
    "ShootingConfig",
    "SolveReport",
    "VelocityField",
    "shoot_left",
    "shoot_right",
    "matching_function",
    "eigen_solve",
    "recover_velocity",
]

_GAUSS_C = np.sqrt(15) / 10


@dataclass
class ShootingConfig:
    """Numerical settings for the shooting solver.

    Fields left as None get mode-dependent defaults (see :meth:`resolve`).

    Attributes:
        r_min: inner start radius, default ``1e-3 r0 / max(n, 10)``.
        r_max: outer start radius, default chosen so that
            ``int_{match}^{r_max} Re sqrt(k) dr >= decay_target``.
        match_radius: default ``r0`` for odd m, the first off-ring peak of
            ``|w_m|`` for even m (where ``phi(r0)`` nearly vanishes).
        newton_tol: relative step size that ends the Newton iteration.
        max_iter: Newton iteration cap.
        ode_tol: target error of the matching function.
        n_points: initial number of nodes on each side.
        max_steps: ceiling on the total number of steps (StiffnessError).
        decay_target: WKB exponent used to place r_max.
    """

    r_min: float = None
    r_max: float = None
    match_radius: float = None
    newton_tol: float = 1e-11
    max_iter: int = 40
    ode_tol: float = 1e-12
    n_points: int = 1000
    max_steps: int = 10**6
    decay_target: float = 40.0

    def resolve(self, profile, ring, n, m, omega):
        """Return a copy with every None filled for mode (n, m)."""
        cfg = ShootingConfig(**self.__dict__)
        if cfg.r_min is None:
            cfg.r_min = 1e-3 * ring.r0 / max(n, 10)
        if cfg.match_radius is None:
            cfg.match_radius = ring.r0 + _match_offset(ring, n, m)
        if cfg.r_max is None:
            cfg.r_max = _default_r_max(profile, ring.beta, n, omega, cfg.match_radius,
                                       cfg.decay_target)
        if not 0 < cfg.r_min < cfg.match_radius < cfg.r_max:
            raise ValidationError("need 0 < r_min < match_radius < r_max")
        return cfg


def _match_offset(ring, n, m):
    if m % 2 == 1:
        return 0.0
    w = weber_mode(ring, max(n, 2), m)
    a = np.abs(w.values)
    pos = w.xi > 0
    xi, a = w.xi[pos], a[pos]
    i = np.nonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]))[0][0] + 1
    return xi[i] * n**-0.75


def _default_r_max(profile, beta, n, omega, r_match, target):
    r = r_match + np.linspace(0.0, 1.0, 2001)
    span = 1.0
    while True:
        pc = potential_coefficients(profile, beta, n, r)
        sk = np.sqrt(pc.k(omega)).real
        acc = np.concatenate([[0.0], np.cumsum(0.5 * (sk[1:] + sk[:-1]) * np.diff(r))])
        if acc[-1] >= target:
            return float(max(np.interp(target, acc, r), r_match + 1.0))
        span *= 2
        if span > 1e4:
            raise ValidationError("potential does not grow enough to place r_max")
        r = r_match + np.linspace(0.0, span, 2001)


def _density(profile, beta, n, omega, r0, r):
    pc = potential_coefficients(profile, beta, n, r)
    w = n**0.75
    dens = 1.0 / r + 3 * w / np.sqrt(1 + (w * (r - r0)) ** 2) + np.sqrt(np.abs(pc.k(omega)))
    # step ceiling 0.1 n^{-3/4} in the ring region
    near = np.abs(r - r0) < 5 * n**-0.5
    dens[near] = np.maximum(dens[near], 10 * w)
    return dens


def _make_grid(profile, beta, n, omega, r0, ra, rb, N):
    """Nodes in t = ln r from ra to rb (either order) equidistributing the density."""
    lo, hi = min(ra, rb), max(ra, rb)
    t_aux = np.linspace(np.log(lo), np.log(hi), 40001)
    r_aux = np.exp(t_aux)
    d_t = r_aux * _density(profile, beta, n, omega, r0, r_aux)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (d_t[1:] + d_t[:-1]) * np.diff(t_aux))])
    t = np.interp(np.linspace(0.0, cum[-1], N + 1), cum, t_aux)
    t[0], t[-1] = np.log(lo), np.log(hi)
    return t if ra < rb else t[::-1]


class _Side:
    """Grid and tabulated potential coefficients for one shooting direction."""

    def __init__(self, profile, beta, n, t):
        self.t = t
        h = np.diff(t)
        self.h = h
        nodes = np.concatenate([
            t[:-1] + (0.5 - _GAUSS_C) * h, t[:-1] + 0.5 * h, t[:-1] + (0.5 + _GAUSS_C) * h, t[:1],
        ])
        self.pc = potential_coefficients(profile, beta, n, np.exp(nodes))
        self.N = len(h)

    def Q(self, omega):
        q = 0.25 + self.pc.r2k(omega)
        N = self.N
        return q[:N], q[N:2 * N], q[2 * N:3 * N], q[3 * N]


def _magnus6(h, Q1, Q2, Q3):
    """Entries of exp(Omega) for A = [[0, 1], [Q, 0]] with 3-point Gauss data."""
    def A(q):
        M = np.zeros(q.shape + (2, 2), dtype=complex)
        M[..., 0, 1] = 1.0
        M[..., 1, 0] = q
        return M

    def comm(X, Y):
        return X @ Y - Y @ X

    A1, A2, A3 = A(Q1), A(Q2), A(Q3)
    H = h[:, None, None]
    a1 = H * A2
    a2 = np.sqrt(15) * H / 3 * (A3 - A1)
    a3 = 10 * H / 3 * (A3 - 2 * A2 + A1)
    C1 = comm(a1, a2)
    C2 = -comm(a1, 2 * a3 + C1) / 60
    Om = a1 + a3 / 12 + comm(-20 * a1 - a3 + C1, a2 + C2) / 240
    # traceless 2x2: exp(Om) = cosh(s) I + sinh(s)/s Om, s^2 = -det(Om)
    s = np.sqrt(Om[..., 0, 0] ** 2 + Om[..., 0, 1] * Om[..., 1, 0])
    small = np.abs(s) < 1e-8
    ss = np.where(small, 1.0, s)
    ch = np.cosh(s)
    sh = np.where(small, 1 + s * s / 6, np.sinh(ss) / ss)
    return ch + sh * Om[..., 0, 0], sh * Om[..., 0, 1], sh * Om[..., 1, 0], ch - sh * Om[..., 0, 0]


def _propagate(M, a, b, keep=False):
    m11, m12, m21, m22 = (x.tolist() for x in M)
    if keep:
        A = [a]
        B = [b]
        L = [0.0]
    logs = 0.0
    for i in range(len(m11)):
        a, b = m11[i] * a + m12[i] * b, m21[i] * a + m22[i] * b
        s = abs(a) + abs(b)
        a /= s
        b /= s
        if keep:
            logs += math.log(s)
            A.append(a)
            B.append(b)
            L.append(logs)
    if keep:
        return np.array(A), np.array(B), np.array(L)
    return a, b


def _run(side, omega, start, keep=False):
    q1, q2, q3, q0 = side.Q(omega)
    if len(side.h) > 0 and start == "left":
        b0 = np.sqrt(q0)
    else:
        # phi'/phi = -sqrt(k) at r_max in r, i.e. psi_t/psi = -r sqrt(k) - 1/2
        r = np.exp(side.t[0])
        k = (q0 - 0.25) / r**2
        sk = np.sqrt(k)
        if sk.real < 0:
            sk = -sk
        b0 = -r * sk - 0.5
    return _propagate(_magnus6(side.h, q1, q2, q3), 1.0 + 0j, complex(b0), keep)


def _logderiv_r(a, b, rm):
    # d(ln phi)/dr = (psi_t/psi + 1/2)/r
    return (b / a + 0.5) / rm


class _Problem:
    def __init__(self, profile, beta, n, omega_seed, r0, cfg, N):
        self.profile, self.beta, self.n, self.r0, self.cfg = profile, beta, n, r0, cfg
        self.seed = omega_seed
        self.set_points(N)

    def set_points(self, N):
        if 2 * N > self.cfg.max_steps:
            raise StiffnessError(f"step count {2 * N} exceeds the ceiling {self.cfg.max_steps}")
        self.N = N
        c = self.cfg
        args = (self.profile, self.beta, self.n, self.seed, self.r0)
        self.left = _Side(self.profile, self.beta, self.n,
                          _make_grid(*args, c.r_min, c.match_radius, N))
        self.right = _Side(self.profile, self.beta, self.n,
                           _make_grid(*args, c.r_max, c.match_radius, N))

    def logderivs(self, omega):
        rm = self.cfg.match_radius
        aL, bL = _run(self.left, omega, "left")
        aR, bR = _run(self.right, omega, "right")
        return _logderiv_r(aL, bL, rm), _logderiv_r(aR, bR, rm)

    def F(self, omega):
        yl, yr = self.logderivs(omega)
        return yl - yr, yl


def _refine(prob, omega):
    """Double the node count until the matching function is converged."""
    F0, yl = prob.F(omega)
    while True:
        N = prob.N
        prob.set_points(2 * N)
        F1, yl = prob.F(omega)
        # sixth order: error of the finer run is about |F1 - F0| / 63
        if abs(F1 - F0) / 63 <= prob.cfg.ode_tol * max(1.0, abs(yl)):
            return
        F0 = F1


def shoot_left(profile, params, config, r0=None):
    """Recessive solution from ``r_min`` to ``match_radius``.

    Args:
        profile: VortexProfile.
        params: PotentialParams with ``Im omega != 0``.
        config: ShootingConfig with r_min, match_radius and r_max set.
        r0: ring radius used for grid clustering (default match_radius).

    Returns:
        RadialField of ``phi`` normalized to 1 at the match radius, with
        its ``r``-derivative.
    """
    return _shoot(profile, params, config, r0, "left")


def shoot_right(profile, params, config, r0=None):
    """Decaying solution from ``r_max`` inward to ``match_radius``.

    Same conventions as :func:`shoot_left`.
    """
    return _shoot(profile, params, config, r0, "right")


def _shoot(profile, params, config, r0, which):
    _check_config(config)
    omega = complex(params.omega)
    if omega.imag == 0:
        raise ValidationError("shooting needs Im(omega) != 0")
    r0 = config.match_radius if r0 is None else r0
    ra = config.r_min if which == "left" else config.r_max
    t = _make_grid(profile, params.beta, params.n, omega, r0, ra, config.match_radius,
                   config.n_points)
    if len(t) - 1 > config.max_steps:
        raise StiffnessError("step count exceeds the ceiling")
    side = _Side(profile, params.beta, params.n, t)
    A, B, L = _run(side, omega, which, keep=True)
    return _assemble_side(side.t, A, B, L, which)


def _check_config(c):
    if c.r_min is None or c.r_max is None or c.match_radius is None:
        raise ValidationError("config must be resolved (call ShootingConfig.resolve)")


def _assemble_side(t, A, B, L, which):
    """phi and phi' on one side, scaled so phi = 1 at the match point."""
    r = np.exp(t)
    # psi_i = A_i exp(L_i); normalize by the value at the match (last node)
    scale = np.exp(L - L[-1]) / A[-1]
    psi, psit = A * scale, B * scale
    phi = np.sqrt(r) * psi
    dphi = (psit + 0.5 * psi) / np.sqrt(r)
    phi_m = phi[-1]
    phi, dphi = phi / phi_m, dphi / phi_m
    if which == "right":
        r, phi, dphi = r[::-1], phi[::-1], dphi[::-1]
    return RadialField(r, phi, dphi, meta={"side": which, "normalization": "phi(match)=1"})


@dataclass
class SolveReport:
    """Converged shooting eigenpair.

    Attributes:
        omega: eigenvalue.
        phi: eigenfunction on the union grid, with ``n^{3/8} ||phi|| = 1`` and
            ``phi(r0)`` real positive.
        residual: ``|F(omega)| / max(1, |phi'/phi|)`` at the match radius.
        iterations: Newton iterations.
        concentration: center, width (std of ``|phi|^2``) and Gaussian-fit error.
        seed_used: the asymptotic seed.
        n, m, beta: mode labels.
        n_points: nodes per side after refinement.
        config: the resolved ShootingConfig.
    """

    omega: complex
    phi: RadialField = field(repr=False)
    residual: float
    iterations: int
    concentration: dict
    seed_used: complex
    n: int
    m: int
    beta: float
    n_points: int
    config: ShootingConfig = field(repr=False, default=None)

    @property
    def params(self):
        return PotentialParams(self.beta, self.n, self.omega)

    def summary(self):
        return {
            "omega": [self.omega.real, self.omega.imag],
            "residual": self.residual,
            "iterations": self.iterations,
            "concentration": self.concentration,
            "seed": [self.seed_used.real, self.seed_used.imag],
            "n": self.n, "m": self.m, "beta": self.beta, "n_points": self.n_points,
        }


def matching_function(profile, ring, n, omega, config=None, m=1):
    """Value of ``F(omega) = (phi_L'/phi_L - phi_R'/phi_R)(match_radius)``."""
    cfg = (config or ShootingConfig()).resolve(profile, ring, n, m, omega)
    prob = _Problem(profile, ring.beta, n, omega, ring.r0, cfg, cfg.n_points)
    return prob.F(omega)[0]


def concentration(phi, r0=None):
    """Center, width and Gaussian-fit error of ``|phi|^2``."""
    w = trapz_weights(phi.r)
    rho = np.abs(phi.values) ** 2
    mass = np.sum(w * rho)
    c = np.sum(w * phi.r * rho) / mass
    width = np.sqrt(np.sum(w * (phi.r - c) ** 2 * rho) / mass)
    g = np.exp(-0.5 * ((phi.r - c) / width) ** 2)
    g *= mass / np.sum(w * g)
    fit = np.sqrt(np.sum(w * (rho - g) ** 2) / np.sum(w * rho**2))
    return {"center": float(c), "width": float(width), "gaussian_fit_error": float(fit)}


def eigen_solve(profile, ring, n, m, config=None, seed=None):
    """Complex Newton iteration on the matching function.

    Args:
        profile: VortexProfile.
        ring: RingGeometry.
        n, m: mode labels.
        config: ShootingConfig (defaults filled per mode).
        seed: starting omega, default the asymptotic eigenvalue.

    Returns:
        SolveReport.

    Raises:
        NoConvergence: Newton did not reach ``newton_tol``.
        SeedEscape: iterate left the ball ``|omega - seed| <= 10 n^{-1/2}``.
        LeftSemicirclePlane: converged with ``Im omega <= 0``.
    """
    spec = mode_spec(ring, n, m)
    seed = complex(spec.omega_app + spec.mu_m if seed is None else seed)
    cfg = (config or ShootingConfig()).resolve(profile, ring, n, m, seed)
    prob = _Problem(profile, ring.beta, n, seed, ring.r0, cfg, cfg.n_points)
    _refine(prob, seed)
    h = 1e-7 * n**-0.5
    radius = 10 * n**-0.5
    omega = seed
    it = 0
    converged = False
    for it in range(1, cfg.max_iter + 1):
        f, _ = prob.F(omega)
        fp = (prob.F(omega + h)[0] - f) / h
        if fp == 0 or not np.isfinite(fp):
            raise NoConvergence("vanishing Newton derivative")
        step = f / fp
        omega = omega - step
        if not np.isfinite(omega):
            raise NoConvergence("Newton produced a non-finite iterate")
        if abs(omega - seed) > radius:
            raise SeedEscape(f"Newton left the ball of radius {radius:.3g} around the seed")
        if abs(step) <= cfg.newton_tol * abs(omega):
            converged = True
            break
    if not converged:
        raise NoConvergence(f"no convergence in {cfg.max_iter} Newton iterations")
    f, yl = prob.F(omega)
    residual = abs(f) / max(1.0, abs(yl))
    if omega.imag <= 0:
        raise LeftSemicirclePlane(omega)
    phi = _assemble(prob, omega, ring.r0, n)
    return SolveReport(
        omega=complex(omega), phi=phi, residual=float(residual), iterations=it,
        concentration=concentration(phi), seed_used=seed, n=int(n), m=int(m),
        beta=float(ring.beta), n_points=prob.N, config=cfg,
    )


def _assemble(prob, omega, r0, n):
    left = _assemble_side(prob.left.t, *_run(prob.left, omega, "left", keep=True), "left")
    right = _assemble_side(prob.right.t, *_run(prob.right, omega, "right", keep=True), "right")
    # both sides equal 1 at the match radius; drop the duplicate node
    r = np.concatenate([left.r, right.r[1:]])
    phi = np.concatenate([left.values, right.values[1:]])
    dphi = np.concatenate([left.derivative, right.derivative[1:]])
    field_ = RadialField(r, phi, dphi)
    c = n**0.375 * field_.l2_norm()
    p0 = np.interp(r0, r, phi.real) + 1j * np.interp(r0, r, phi.imag)
    c = c * p0 / abs(p0)
    out = field_.scaled(1 / c)
    out.meta = {"normalization": "n^{3/8} ||phi||_L2 = 1, phi(r0) > 0",
                "match_jump": complex(left.derivative[-1] - right.derivative[0])}
    return out


@dataclass
class VelocityField:
    """Velocity of a Rayleigh mode ``u(r) exp(i(alpha z - n theta))``.

    ``divergence_residual`` and ``momentum_residual`` are relative L2
    residuals of the continuity and radial momentum equations.
    """

    r: np.ndarray
    u_r: np.ndarray
    u_theta: np.ndarray
    u_z: np.ndarray
    pressure: np.ndarray
    divergence_residual: float
    momentum_residual: float


def _jet_sqrt_s(r, beta):
    # s = ((1 + beta^2 r^2)/r^3)^{1/2} and its first two derivatives
    b2 = beta * beta
    s = np.sqrt((1 + b2 * r * r) / r**3)
    L1 = b2 * r / (1 + b2 * r * r) - 1.5 / r
    L2 = b2 * (1 - b2 * r * r) / (1 + b2 * r * r) ** 2 + 1.5 / r**2
    return s, s * L1, s * (L1 * L1 + L2)


def recover_velocity(phi, params, profile):
    """Velocity components and pressure from the reduced variable ``phi``.

    ``u_r = ((1 + beta^2 r^2)/r^3)^{1/2} phi``; ``u_z`` and ``u_theta`` solve
    the 2x2 system formed by the axial/azimuthal momentum balance and
    continuity,

        i gamma n u_z + i gamma alpha r u_theta = -u_r (alpha (rV)' + n W')
        i alpha u_z - (i n / r) u_theta       = -u_r' - u_r / r

    whose determinant ``gamma (n^2 + alpha^2 r^2)/r`` is nonzero for
    ``Im omega != 0``. Derivatives of the coefficients come from Taylor
    jets and ``phi''`` from the ODE, so the radial momentum residual is an
    independent check of the reduction to ``phi'' = k phi``.

    Args:
        phi: RadialField with ``derivative`` (e.g. ``SolveReport.phi``).
        params: PotentialParams of the mode.
        profile: the base flow.

    Returns:
        VelocityField.
    """
    if phi.derivative is None:
        raise ValidationError("phi must carry its derivative")
    r = np.asarray(phi.r, dtype=float)
    n, beta, omega = params.n, params.beta, complex(params.omega)
    alpha = beta * n
    if alpha == 0:
        raise ValidationError("velocity recovery needs alpha != 0")
    fb = eval_fields(profile, beta, r)
    J = fb.jets
    rj = Jet.variable(r, 1)
    W, G, Om = J["W"].truncate(2), J["Gamma"].truncate(2), J["Omega"].truncate(1)
    Wp, Gp = W.d(), G.d()
    gam = J["Lambda"].truncate(1) * n - omega
    det = gam * (rj * rj * alpha**2 + n * n) / rj
    c1 = -(Gp * alpha + Wp * n)
    Az = (c1 * (-1j * n) / rj + gam * (1j * alpha)) / det
    Bz = gam * rj * (1j * alpha) / det
    At = (gam * (-1j * n) / rj - c1 * (1j * alpha)) / det
    Bt = gam * (-1j * n) / det

    pc = potential_coefficients(profile, beta, n, r)
    k = pc.k(omega)
    s, s1, s2 = _jet_sqrt_s(r, beta)
    f, f1 = phi.values, phi.derivative
    ur = s * f
    ur1 = s1 * f + s * f1
    ur2 = s2 * f + 2 * s1 * f1 + s * k * f

    uz = Az.value() * ur + Bz.value() * ur1
    ut = At.value() * ur + Bt.value() * ur1
    uz1 = Az.derivative(1) * ur + (Az.value() + Bz.derivative(1)) * ur1 + Bz.value() * ur2
    g0, g1 = gam.value(), gam.derivative(1)
    Wp0, Wp1 = Wp.value(), Wp.derivative(1)
    p = -(1j * g0 * uz + Wp0 * ur) / (1j * alpha)
    p1 = -(1j * g1 * uz + 1j * g0 * uz1 + Wp1 * ur + Wp0 * ur1) / (1j * alpha)
    mom = 1j * g0 * ur - 2 * Om.value() * ut + p1
    div = ur1 + ur / r - 1j * n * ut / r + 1j * alpha * uz

    w = trapz_weights(r)
    unorm = np.sqrt(np.sum(w * (np.abs(ur) ** 2 + np.abs(ut) ** 2 + np.abs(uz) ** 2)))
    dnorm = np.sqrt(np.sum(w * (np.abs(ur1) ** 2 + np.abs(ur / r) ** 2)))
    mscale = np.sqrt(np.sum(w * np.abs(g0 * ur) ** 2))
    return VelocityField(
        r=r, u_r=ur, u_theta=ut, u_z=uz, pressure=p,
        divergence_residual=float(np.sqrt(np.sum(w * np.abs(div) ** 2)) / max(dnorm, unorm)),
        momentum_residual=float(np.sqrt(np.sum(w * np.abs(mom) ** 2)) / mscale),
    )
