import numpy as np
import pytest

from vortexray import BatchelorProfile, locate_batchelor
from vortexray.criteria import (base_fields, criteria_report, howard_gupta_batchelor,
                                howard_gupta_growth_bound, howard_gupta_integrand,
                                howard_gupta_pointwise, ls_sufficient_condition,
                                rayleigh_phi_sign, scan_grid, semicircle)
from vortexray.errors import NegativeBound, ValidationError
from vortexray.profiles import FunctionProfile

lamb_oseen = FunctionProfile(lambda r: (1 - np.exp(-r * r)) / r, lambda r: 0 * r)


def test_published_semicircle_numbers(batchelor, ring):
    sc = semicircle(batchelor, ring, 100)
    assert ring.sqrt_b0 == pytest.approx(0.194, abs=3e-3)
    assert sc.Rtilde_max == pytest.approx(0.218, abs=3e-3)
    assert ring.sqrt_b0 < sc.Rtilde_max


def test_semicircle_centre_and_radius(batchelor, ring):
    n = 100
    sc = semicircle(batchelor, ring, n)
    assert sc.Lambda_max == 0.0
    assert sc.Lambda_min == pytest.approx(ring.Lambda0, abs=1e-14)
    assert sc.omega0 == pytest.approx(n * ring.Lambda0 / 2, rel=1e-12)
    assert sc.omega_max**2 == pytest.approx(n * n * ring.Lambda0**2 / 4 + sc.Rtilde_max**2, rel=1e-12)


def test_semicircle_against_finer_grid():
    P, R = BatchelorProfile(0.1), locate_batchelor(0.1)
    a = semicircle(P, R, 50)
    b = semicircle(P, R, 50, r_grid=scan_grid(n=100_000))
    for key in ("omega0", "omega_max", "Rtilde_max", "Lambda_min"):
        assert getattr(a, key) == pytest.approx(getattr(b, key), rel=1e-6)


def test_real_axis_not_inside(batchelor, ring):
    sc = semicircle(batchelor, ring, 100)
    assert not sc.contains(sc.omega0)
    assert not sc.contains(sc.omega0 - 1e-9j)
    assert sc.contains(sc.omega0 + 0.1j)
    b = sc.boundary(50)
    assert np.allclose(np.abs(b - sc.omega0), sc.omega_max) and np.all(b.imag >= 0)


@pytest.mark.parametrize("q", [0.05, 0.1, 0.25, 0.5, 1.0, 1.28])
def test_growth_rate_below_rtilde_over_q_range(q):
    P, R = BatchelorProfile(q), locate_batchelor(q)
    assert R.sqrt_b0 < semicircle(P, R, 50).Rtilde_max


def test_howard_gupta_negative_at_ring(batchelor, ring):
    n = 100
    v = howard_gupta_pointwise(batchelor, n, ring.beta * n, np.array([ring.r0]))[0]
    assert v < 0


def test_howard_gupta_violated_on_scan(batchelor, ring):
    r = scan_grid()
    assert len(r) == 10_000
    v = howard_gupta_pointwise(batchelor, 100, 100 * ring.beta, r)
    assert np.all(v < 0)


def test_howard_gupta_degenerate(batchelor):
    r = scan_grid(n=500)
    np.testing.assert_array_equal(howard_gupta_pointwise(batchelor, 0, 0.0, r), 0.0)


@pytest.mark.parametrize("n", [1, 7, 100])
def test_howard_gupta_closed_form(batchelor, ring, n):
    r = scan_grid(n=2000)
    gen = howard_gupta_pointwise(batchelor, n, ring.beta * n, r)
    closed = howard_gupta_batchelor(0.25, ring.beta, r, n)
    np.testing.assert_allclose(gen, closed, rtol=1e-9, atol=1e-12 * n * n)


@pytest.mark.parametrize("q", [0.1, 0.25])
def test_growth_bound_above_asymptotic_rate(q):
    P, R = BatchelorProfile(q), locate_batchelor(q)
    assert howard_gupta_growth_bound(P, R) >= R.sqrt_b0


def test_growth_bound_two_dimensional_vortex():
    beta = 0.3
    r = scan_grid(n=500)
    f = base_fields(lamb_oseen, r)
    # with W = 0 only -Phi and Omega'^2 / beta^2 survive
    ref = r * r / (1 + beta**2 * r * r) * (f["dOmega"] ** 2 - beta**2 * f["Phi"])
    np.testing.assert_allclose(howard_gupta_integrand(lamb_oseen, beta, r), ref, rtol=1e-12)


def test_growth_bound_negative_and_invalid(ring):
    solid = FunctionProfile(lambda r: r, lambda r: 0 * r)
    # Omega' = 0 and Phi = 4 leave a negative integrand
    with pytest.raises(NegativeBound):
        howard_gupta_growth_bound(solid, ring, beta=0.5)
    with pytest.raises(ValidationError):
        howard_gupta_growth_bound(solid, ring, beta=0.0)


def test_ls_condition(batchelor):
    out = ls_sufficient_condition(batchelor)
    assert out["violated_somewhere"] and out["witness_r"] > 0 and out["min_value"] < 0


def test_ls_condition_pure_jet():
    jet = FunctionProfile(lambda r: 0 * r, lambda r: np.exp(-r * r))
    out = ls_sufficient_condition(jet)
    assert not out["violated_somewhere"] and out["witness_r"] is None


def test_ls_condition_two_dimensional_reports_scan():
    out = ls_sufficient_condition(lamb_oseen)
    assert isinstance(out["violated_somewhere"], bool)


@pytest.mark.parametrize("q", [0.1, 0.25, 1.0])
def test_rayleigh_function_batchelor(q):
    out = rayleigh_phi_sign(BatchelorProfile(q))
    assert out["nonnegative_everywhere"] and out["witness_r"] is None


def test_rayleigh_function_solid_body():
    Om = 0.7
    solid = FunctionProfile(lambda r: Om * r, lambda r: 0 * r)
    r = np.linspace(0.1, 5, 50)
    np.testing.assert_allclose(base_fields(solid, r)["Phi"], 4 * Om**2, rtol=1e-8)


def test_rayleigh_function_counterexample():
    # Gamma = r^2 e^{-r^2} decreases for r > 1
    P = FunctionProfile(lambda r: r * np.exp(-r * r), lambda r: 0 * r)
    out = rayleigh_phi_sign(P)
    assert not out["nonnegative_everywhere"] and out["witness_r"] > 1


def test_report_contains_modes(batchelor, ring, shoot):
    om = shoot(100).omega
    rep = criteria_report(batchelor, ring, 100, modes=[om])
    assert rep["sqrt_b0_below_Rtilde_max"]
    assert rep["howard_gupta"]["violated_everywhere"]
    m = rep["modes"][0]
    assert m["in_semicircle"] and m["below_growth_bound"]
