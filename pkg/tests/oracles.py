"""Extended-precision reference formulas for the Batchelor vortex.

Everything here is written directly from the closed forms with mpmath and
numerical differentiation at 40 digits, independently of the jet machinery
in the package.
"""

import mpmath as mp

mp.mp.dps = 40


def Gamma(q, r):
    return q * (1 - mp.e ** (-r * r))


def Omega(q, r):
    return Gamma(q, r) / r**2


def W(r):
    return mp.e ** (-r * r)


def Lam(q, beta, r):
    return beta * W(r) - Omega(q, r)


def Phi(q, r):
    return 2 * Gamma(q, r) * mp.diff(lambda x: Gamma(q, x), r) / r**3


def p(beta, r):
    return (1 + beta**2 * r**2) / r**2


def b(q, beta, r):
    return r**2 * beta * (1 - q * beta) * Phi(q, r) / (q * (1 + beta**2 * r**2))


def d(beta, r):
    x = beta**2 * r**2
    return -(1 + 10 * x - 3 * x * x) / (4 * (1 + x) ** 3)


def a(q, beta, r):
    def X(s):
        dW = mp.diff(W, s)
        dG = mp.diff(lambda t: Gamma(q, t), s)
        return (s * beta * dW - dG / s) / (1 + beta**2 * s**2)
    return r * mp.diff(X, r)


def k(q, beta, n, omega, r):
    r = mp.mpf(r)
    g = n * Lam(q, beta, r) - omega
    return p(beta, r) * n**2 * (1 + a(q, beta, r) / (n * g) + b(q, beta, r) / g**2 + d(beta, r) / n**2)


def ring(q, r_guess, beta_guess):
    """Solve Lambda'(r) = 0, b'(r) = 0 by mpmath's multidimensional Newton."""
    def F(r, beta):
        return [mp.diff(lambda x: Lam(q, beta, x), r), mp.diff(lambda x: b(q, beta, x), r)]
    r0, beta = mp.findroot(F, (mp.mpf(r_guess), mp.mpf(beta_guess)))
    return r0, beta


def ring_data(q, r0, beta):
    """(b0, Lambda0, Lambda''(r0), p0) at a ring point."""
    return (b(q, beta, r0), Lam(q, beta, r0),
            mp.diff(lambda x: Lam(q, beta, x), r0, 2), p(beta, r0))
