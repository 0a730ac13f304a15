"""Discretized linearized Euler operator in vorticity form.

For a perturbation ``exp(lambda t + i(alpha z - n theta))`` the vorticity
obeys ``lambda w = A w + B u`` with ``u`` the Biot-Savart velocity of ``w``.
``A`` is the multiplication (transport and stretching by the base flow)
part and ``B`` collects the terms driven by the base vorticity
``(0, -W', (rV)'/r)``. In components, with ``s = i(-n Omega + alpha W)``::

    A = [[-s, 0], [V' - V/r, -s]]            acting on (w_r, w_theta)
    B = [[i n W'/r + i alpha Z, 0],
         [W'' - W'/r, i n W'/r + i alpha Z]]  acting on (u_r, u_theta)

where ``Z = (rV)'/r``. Both velocity and vorticity are divergence free, so
``u_z`` and ``w_z`` are eliminated and the unknowns are ``(u_r, u_theta)``.
The discrete curl ``M: u -> (w_r, w_theta)`` is the Biot-Savart map
inverted; the eigenproblem ``(A M + B) u = lambda M u`` is solved densely.

Grid: ``r = r0 + c sinh(s)`` on a uniform s-grid from ``r = 0`` to ``R_max``
with Dirichlet ends (valid for ``|n| >= 2``), second-order differences.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig

from .errors import NoUnstable, SingularBS, ValidationError

__all__ = ["ModalMatrix", "assemble", "spectrum", "most_unstable", "modal_fields"]


def modal_fields(profile, r):
    """Base-flow coefficients used by the operator at radii ``r``."""
    J = profile.jets(np.asarray(r, dtype=float), 2)
    Om, W, G = J["Omega"], J["W"], J["Gamma"]
    Gv, Gp = G.value(), G.derivative(1)
    return {
        "Omega": Om.value(), "V": r * Om.value(), "dV": Gp / r - Gv / r**2,
        "W": W.value(), "dW": W.derivative(1), "d2W": W.derivative(2), "Z": Gp / r,
    }


@dataclass
class ModalMatrix:
    """Assembled operator blocks for one ``(n, alpha)``.

    Attributes:
        n, alpha: physical wavenumbers (perturbation ``exp(i(alpha z - n theta))``).
        r: interior grid nodes.
        A_block: multiplication part acting on ``(w_r, w_theta)``.
        B_block: base-vorticity part acting on ``(u_r, u_theta)``.
        curl: discrete curl ``(u_r, u_theta) -> (w_r, w_theta)``.
    """

    n: int
    alpha: float
    r: np.ndarray
    A_block: np.ndarray = field(repr=False)
    B_block: np.ndarray = field(repr=False)
    curl: np.ndarray = field(repr=False)
    D1: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    @property
    def N_g(self):
        return len(self.r)

    @property
    def K(self):
        return self.A_block @ self.curl + self.B_block

    def velocity_z(self, u_r, u_t):
        """``u_z`` from the divergence constraint."""
        nm = -self.n
        return (1j / self.alpha) * (self.D1 @ u_r + u_r / self.r + 1j * nm * u_t / self.r)

    def bs_solver(self, w):
        """Discrete Biot-Savart law: ``(w_r, w_theta) -> (u_r, u_theta, u_z)``.

        Raises:
            SingularBS: if the discrete curl is numerically singular.
        """
        w = np.asarray(w, dtype=complex)
        try:
            u = np.linalg.solve(self.curl, w)
        except np.linalg.LinAlgError as exc:
            raise SingularBS("discrete curl system is singular") from exc
        if not np.all(np.isfinite(u)):
            raise SingularBS("discrete curl system is singular")
        N = self.N_g
        return u[:N], u[N:], self.velocity_z(u[:N], u[N:])

    def divergence(self, u_r, u_t, u_z):
        """Discrete ``(r u_r)'/r - i n u_theta/r + i alpha u_z``."""
        return self.D1 @ u_r + u_r / self.r - 1j * self.n * u_t / self.r + 1j * self.alpha * u_z

    def apply_B(self, u_r, u_t):
        return self.B_block @ np.concatenate([u_r, u_t])


def _grid(R_max, N, r0, c):
    sL = -np.arcsinh(r0 / c)
    sR = np.arcsinh((R_max - r0) / c)
    s = np.linspace(sL, sR, N + 2)
    return s, r0 + c * np.sinh(s), c * np.cosh(s), c * np.sinh(s)


def assemble(profile, n, alpha, N_g=1024, R_max=6.0, r_center=None, c=0.1):
    """Assemble the modal operator.

    Args:
        profile: base flow.
        n: azimuthal wavenumber, ``|n| >= 2``.
        alpha: axial wavenumber, nonzero.
        N_g: number of interior nodes, at least 256.
        R_max: outer radius (Dirichlet).
        r_center: grid clustering centre, default the ring radius 0.825.
        c: clustering width of the sinh map.

    Raises:
        ValidationError: for excluded wavenumbers or too few nodes.
    """
    if int(n) != n or abs(n) < 2:
        raise ValidationError("modal operator needs integer |n| >= 2")
    if alpha == 0:
        raise ValidationError("modal operator needs alpha != 0")
    if N_g < 256:
        raise ValidationError("N_g must be at least 256")
    r0 = 0.8252 if r_center is None else float(r_center)
    s, rr, rs_, rss_ = _grid(R_max, int(N_g), r0, c)
    h = s[1] - s[0]
    r, rs, rss = rr[1:-1], rs_[1:-1], rss_[1:-1]
    N = len(r)
    I = np.eye(N)
    D1s = (np.eye(N, k=1) - np.eye(N, k=-1)) / (2 * h)
    D2s = (np.eye(N, k=1) - 2 * I + np.eye(N, k=-1)) / h**2
    D1 = D1s / rs[:, None]
    D2 = (D2s - (rss / rs)[:, None] * D1s) / (rs**2)[:, None]
    f = modal_fields(profile, r)
    nm, ia = -int(n), 1j * alpha
    inn = 1j * nm
    Rm = np.diag(1 / r)
    # u_z = (i/alpha)(u_r' + u_r/r + i nm u_theta/r)
    Pz_r = (1j / alpha) * (D1 + Rm)
    Pz_t = (1j / alpha) * inn * Rm
    # w_r = i nm u_z / r - i alpha u_theta ; w_theta = i alpha u_r - u_z'
    Mrr = inn * Rm @ Pz_r
    Mrt = inn * Rm @ Pz_t - ia * I
    Mtr = ia * I - (1j / alpha) * (D2 + Rm @ D1 - Rm @ Rm)
    # u_theta / r tends to a constant at the axis; its ghost value there is
    # extrapolated quadratically in r instead of set to zero
    Dg = D1s.copy()
    a = r[1] ** 2 / (r[1] ** 2 - r[0] ** 2)
    Dg[0, 0] -= a / (2 * h)
    Dg[0, 1] -= (1 - a) / (2 * h)
    Mtt = -(1j / alpha) * inn * (Dg / rs[:, None]) @ Rm
    curl = np.block([[Mrr, Mrt], [Mtr, Mtt]])
    adv = inn * f["Omega"] + ia * f["W"]
    Z0 = np.zeros((N, N))
    A = np.block([[np.diag(-adv), Z0], [np.diag(f["dV"] - f["V"] / r), np.diag(-adv)]])
    dB = -inn * f["dW"] / r + ia * f["Z"]
    B = np.block([[np.diag(dB), Z0], [np.diag(f["d2W"] - f["dW"] / r), np.diag(dB)]])
    return ModalMatrix(int(n), float(alpha), r, A, B, curl, D1,
                       meta={"R_max": R_max, "c": c, "r_center": r0})


def spectrum(modal, vectors=False):
    """All eigenvalues (and optionally velocity eigenvectors) of the assembled operator."""
    try:
        L = np.linalg.solve(modal.curl, modal.K)
    except np.linalg.LinAlgError as exc:
        raise SingularBS("discrete curl system is singular") from exc
    if vectors:
        lam, vec = eig(L, overwrite_a=True, check_finite=False)
        return lam, vec
    return eig(L, right=False, overwrite_a=True, check_finite=False)


def most_unstable(modal, threshold=1e-8, return_spectrum=False):
    """Eigenvalue with the largest real part and its eigenvector.

    Returns:
        ``(lam, u_r, u_theta, w)`` with the velocity components on
        ``modal.r`` and the vorticity ``w = (w_r, w_theta)``; with
        ``return_spectrum`` the full eigenvalue array is appended.

    Raises:
        NoUnstable: if no eigenvalue has real part above ``threshold``.
    """
    lam, vec = spectrum(modal, vectors=True)
    ok = np.isfinite(lam)
    lam, vec = lam[ok], vec[:, ok]
    j = int(np.argmax(lam.real))
    if lam[j].real < threshold:
        raise NoUnstable(f"largest real part {lam[j].real:.3g} below {threshold:g}")
    u = vec[:, j]
    N = modal.N_g
    # fix scale and phase by the largest radial component
    k = int(np.argmax(np.abs(u[:N])))
    u = u / u[k]
    out = (complex(lam[j]), u[:N], u[N:], modal.curl @ u)
    return out + (lam,) if return_spectrum else out
