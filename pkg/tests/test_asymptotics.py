import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from vortexray.asymptotics import (WeberMode, hermite_paper, k_err_diagnostic, mode_spec,
                                   omega_asymptotic, taylor_coeffs, weber_mode)
from vortexray.errors import GridTooNarrow, OutOfRegime, ValidationError
from vortexray.radial import trapz_weights


def test_hermite_low_orders():
    x = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(hermite_paper(1, x), np.ones_like(x))
    np.testing.assert_allclose(hermite_paper(2, x), 2 * x)


def test_hermite_by_symbolic_derivative():
    f = lambda x: mp.e ** (-x * x)
    ref = -mp.e ** 1 * mp.diff(f, 1, 3)
    assert hermite_paper(4, 1.0) == pytest.approx(float(ref), rel=1e-12)
    assert hermite_paper(4, 1.0) == pytest.approx(-4.0)


@given(st.integers(1, 30), st.floats(-4, 4))
def test_hermite_against_mpmath(m, x):
    ref = float(mp.hermite(m - 1, x))
    assert hermite_paper(m, x) == pytest.approx(ref, rel=1e-10, abs=1e-10 * 2.0**m)


def test_hermite_rejects_index_zero():
    with pytest.raises(ValidationError):
        hermite_paper(0, 1.0)


def test_taylor_phases(ring):
    tc = taylor_coeffs(ring, 100, 1)
    assert np.angle(tc.k2) == pytest.approx(np.pi / 2, abs=1e-15)
    assert np.angle(tc.k2_sqrt) == pytest.approx(np.pi / 4, abs=1e-15)
    ref = (1 + 1j) * 100**1.5 * np.sqrt(ring.p0 * ring.Lambda2 / (2 * ring.sqrt_b0))
    assert tc.k2_sqrt == pytest.approx(ref, rel=1e-14)


def test_taylor_values_extended_precision():
    r0, beta = oracles.ring(0.25, 0.825, 0.159)
    b0, _, L2, p0 = oracles.ring_data(0.25, r0, beta)
    n = 100
    k2 = 1j * n**3 * p0 * L2 / mp.sqrt(b0)
    k0 = -mp.sqrt(k2)
    from vortexray import locate_batchelor
    tc = taylor_coeffs(locate_batchelor(0.25), n, 1)
    assert tc.k2 == pytest.approx(complex(k2), rel=1e-8)
    assert tc.k0 == pytest.approx(complex(k0), rel=1e-8)


@pytest.mark.parametrize("n", [100, 10_000])
def test_taylor_form_matches_potential(ring, n):
    spec = mode_spec(ring, n, 1)
    tc = taylor_coeffs(ring, n, 1)
    f = lambda r: oracles.k(0.25, mp.mpf(ring.beta), n, mp.mpc(spec.omega), r)
    k2 = complex(mp.diff(f, mp.mpf(ring.r0), 2) / 2)
    # the quadratic coefficient is exact up to O(n^{-1/2}) relative
    assert abs(k2 / tc.k2 - 1) < n**-0.5


@given(st.integers(2, 2000), st.integers(1, 12))
def test_quantization_identity(n, m):
    tc = taylor_coeffs_cached(n, m)
    assert tc.k0 / tc.k2_sqrt == pytest.approx(-(2 * m - 1), rel=1e-14)
    assert tc.K0 == pytest.approx(tc.k0 * n**-1.5, rel=1e-14)
    assert tc.K2 == pytest.approx(tc.k2 * n**-3.0, rel=1e-14)
    assert tc.k2_sqrt.real > 0


_RING = {}


def taylor_coeffs_cached(n, m):
    if "r" not in _RING:
        from vortexray import locate_batchelor
        _RING["r"] = locate_batchelor(0.25)
    return taylor_coeffs(_RING["r"], n, m)


def test_omega_formula(ring):
    om = omega_asymptotic(ring, 100, 1)
    r0, beta = oracles.ring(0.25, 0.825, 0.159)
    b0, L0, L2, p0 = oracles.ring_data(0.25, r0, beta)
    ref = 100 * L0 + 1j * mp.sqrt(b0) + (1 - 1j) * mp.mpf(100) ** -0.5 * mp.sqrt(mp.sqrt(b0) * L2 / (8 * p0))
    assert om == pytest.approx(complex(ref), rel=1e-9)
    mu = mode_spec(ring, 100, 1).mu_m
    assert mu.real > 0 and mu.imag < 0


def test_growth_rate_approach(ring):
    ns = np.array([1e2, 1e3, 1e4])
    gap = [ring.sqrt_b0 - omega_asymptotic(ring, int(n), 1).imag for n in ns]
    slope = np.polyfit(np.log(ns), np.log(gap), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-12)


def test_higher_families_less_unstable(ring):
    im = [omega_asymptotic(ring, 100, m).imag for m in (1, 2, 3)]
    assert im[0] > im[1] > im[2]


def test_mode_validation(ring):
    with pytest.raises(ValidationError):
        mode_spec(ring, 1, 1)
    with pytest.raises(ValidationError):
        mode_spec(ring, 10, 0)


def test_weber_m1_even_and_normalized(ring):
    W = weber_mode(ring, 100, 1)
    a = np.abs(W.values)
    np.testing.assert_allclose(a, a[::-1], atol=1e-14)
    assert np.sum(trapz_weights(W.xi) * a**2) == pytest.approx(1.0, rel=1e-10)
    assert W.c_m > 0


def test_weber_m2_vanishes_at_ring(ring):
    W = weber_mode(ring, 100, 2)
    assert W.evaluate(np.array([0.0]))[0] == 0


def _spectral_d2(xi, f):
    k = 2 * np.pi * np.fft.fftfreq(len(xi), xi[1] - xi[0])
    return np.fft.ifft(-(k**2) * np.fft.fft(f))


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
def test_weber_equation_residual(ring, m):
    W = weber_mode(ring, 100, m)
    d2 = _spectral_d2(W.xi, W.values)
    res = d2 - (W.K0 + W.K2 * W.xi**2) * W.values
    w = trapz_weights(W.xi)
    assert np.sqrt(np.sum(w * np.abs(res) ** 2)) < 1e-8
    # analytic second derivative agrees with the spectral one
    np.testing.assert_allclose(W.evaluate(W.xi, 2), d2, atol=1e-8)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 6])
def test_weber_hermite_factor_sign_changes(ring, m):
    W = weber_mode(ring, 100, m)
    g = W.c_m * np.exp(-0.5 * W.K2_sqrt * W.xi**2)
    np.testing.assert_allclose(W.values / g, hermite_paper(m, W.K2_quarter * W.xi), rtol=1e-12)
    # on the ray where K2^{1/4} xi is real the factor has m - 1 simple zeros
    t = np.linspace(-8, 8, 4000)
    assert np.count_nonzero(np.diff(np.sign(hermite_paper(m, t))) != 0) == m - 1


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_weber_branch_invariance(ring, m):
    W = weber_mode(ring, 100, m)
    flipped = WeberMode(m=m, K2_sqrt=W.K2_sqrt, K2_quarter=-W.K2_quarter, xi=W.xi,
                        values=None, c_m=W.c_m)
    np.testing.assert_allclose(np.abs(flipped.evaluate(W.xi)), np.abs(W.values), atol=1e-14)


def test_width_scaling(ring):
    ns = np.array([100, 300, 1000])
    widths = []
    for n in ns:
        W = weber_mode(ring, int(n), 1)
        w = trapz_weights(W.xi) * np.abs(W.values) ** 2
        widths.append(np.sqrt(np.sum(w * W.xi**2)) * n**-0.75)
    slope = np.polyfit(np.log(ns), np.log(widths), 1)[0]
    assert slope == pytest.approx(-0.75, abs=0.02)


def test_grid_too_narrow(ring):
    with pytest.raises(GridTooNarrow):
        weber_mode(ring, 100, 1, np.linspace(-2, 2, 81))


def test_k_err_constant_stable(batchelor, ring):
    at_ring = [k_err_diagnostic(batchelor, ring, n, 1, 0, [ring.r0]) for n in (50, 100, 200, 400, 800)]
    assert max(at_ring) / min(at_ring) < 1.1
    for n in (50, 100, 200, 400, 800):
        r = ring.r0 + np.linspace(-1, 1, 41) * n**-0.5
        assert k_err_diagnostic(batchelor, ring, n, 1, 0.5 / n, r) < 3.0
        assert k_err_diagnostic(batchelor, ring, n, 2, 0.5 / n, r) < 5.0


def test_k_err_normalizer_at_unit_xi(batchelor, ring):
    n = 400
    r = ring.r0 + n**-0.75
    # 1 + n^3 x^4 = 2 exactly
    assert 1 + n**3 * (r - ring.r0) ** 4 == pytest.approx(2.0)
    assert np.isfinite(k_err_diagnostic(batchelor, ring, n, 1, 0, [r]))


def test_k_err_regime(batchelor, ring):
    with pytest.raises(OutOfRegime):
        k_err_diagnostic(batchelor, ring, 100, 1, 0.2, [ring.r0])
    with pytest.raises(OutOfRegime):
        k_err_diagnostic(batchelor, ring, 100, 1, 0, [ring.r0 + 0.2])
