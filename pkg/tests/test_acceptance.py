"""Acceptance criteria 1 to 9, each with its tolerance and runtime budget.

Each test records a one-line verdict that is printed in the terminal
summary. Shared solves are memoized in session fixtures; their runtimes
are the wall times of the first call.
"""

import json
import time

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import ACCEPTANCE_LINES
from vortexray import BatchelorProfile, locate_batchelor
from vortexray.asymptotics import omega_asymptotic, taylor_coeffs, weber_mode
from vortexray.cli import main
from vortexray.criteria import (howard_gupta_growth_bound, howard_gupta_pointwise, scan_grid,
                                semicircle)
from vortexray.gluing import weber_operator_spectrum
from vortexray.profiles import PotentialParams, eval_potential_k
from vortexray.radial import trapz_weights
from vortexray.shooting import recover_velocity


def record(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def _width(phi):
    w = trapz_weights(phi.r) * np.abs(phi.values) ** 2
    mean = np.sum(w * phi.r) / np.sum(w)
    return float(np.sqrt(np.sum(w * (phi.r - mean) ** 2) / np.sum(w)))


def test_criterion_1_ring_location(capsys):
    t = time.perf_counter()
    code = main(["locate", "--q", "0.25", "--json"])
    dt = time.perf_counter() - t
    res = json.loads(capsys.readouterr().out)["result"]
    r0, beta = res["r0"], res["beta"]
    ok = code == 0 and abs(r0 - 0.8252) <= 5e-4 and abs(beta - 0.1589) <= 5e-4 and dt < 0.1
    record(1, ok, f"r0={r0:.6f} beta={beta:.6f} time={dt:.3f}s")


def test_criterion_2_semicircle_numbers():
    t = time.perf_counter()
    R = locate_batchelor(0.25)
    sc = semicircle(BatchelorProfile(0.25), R, 100)
    dt = time.perf_counter() - t
    sb, rt = R.sqrt_b0, sc.Rtilde_max
    ok = abs(sb - 0.194) <= 3e-3 and abs(rt - 0.218) <= 3e-3 and sb < rt and dt < 1
    record(2, ok, f"sqrt(b0)={sb:.5f} max Rtilde={rt:.5f} time={dt:.3f}s")


def test_criterion_3_weber_spectrum():
    t = time.perf_counter()
    lam = weber_operator_spectrum(np.pi / 4, N_h=64)
    dt = time.perf_counter() - t
    exact = -(2 * np.arange(1, 11) - 1) * np.exp(0.25j * np.pi)
    err = max(np.min(np.abs(lam - e)) for e in exact)
    record(3, err < 1e-8 and dt < 1, f"max |lambda_m - exact| (m<=10) = {err:.2e} time={dt:.3f}s")


def test_criterion_4_eigenvalue_asymptotics(ring, shoot, solves):
    ns = [50, 100, 200, 400]
    reps = [shoot(n) for n in ns]
    dt = sum(solves.times[("shoot", n, 1)] for n in ns)
    asym = [omega_asymptotic(ring, n, 1) for n in ns]
    err = np.array([abs(r.omega - a) for r, a in zip(reps, asym)])
    seeded = all(r.seed_used == a for r, a in zip(reps, asym))
    growing = all(r.omega.imag > 0 for r in reps)
    slope = float(np.polyfit(np.log(ns), np.log(err), 1)[0])
    mono = bool(np.all(np.diff(err) < 0))
    ok = seeded and growing and slope <= -0.8 and mono and dt < 120
    errs = ", ".join(f"{e:.2e}" for e in err)
    record(4, ok, f"slope={slope:.3f} errors=[{errs}] time={dt:.1f}s")


def test_criterion_5_cross_solver(shoot, glue, solves):
    rel = {}
    for m in (1, 2):
        g, s = glue(200, m), shoot(200, m)
        rel[m] = abs(g.omega - s.omega) / abs(s.omega)
    dt = sum(solves.times[("glue", 200, m)] + solves.times[("shoot", 200, m)] for m in (1, 2))
    ok = max(rel.values()) < 1e-6 and dt < 300
    record(5, ok, f"rel diff m=1 {rel[1]:.2e}, m=2 {rel[2]:.2e} time={dt:.1f}s")


def test_criterion_6_modal_oracle(batchelor, shoot, modal30, solves):
    (M, (lam, u_r, _, _, _)) = modal30(1024)
    rep = shoot(30)
    dt = solves.times[("modal", 1024)] + solves.times[("shoot", 30, 1)]
    target = -1j * rep.omega
    rel = abs(lam - target) / abs(target)
    vel = recover_velocity(rep.phi, rep.params, batchelor)
    x = rep.phi.r
    u = np.interp(M.r, x, vel.u_r.real) + 1j * np.interp(M.r, x, vel.u_r.imag)
    u[(M.r < x.min()) | (M.r > x.max())] = 0
    corr = abs(np.vdot(u, u_r)) / (np.linalg.norm(u) * np.linalg.norm(u_r))
    ok = rel < 1e-2 and corr > 0.99 and dt < 180
    record(6, ok, f"rel |lambda + i omega| = {rel:.2e} u_r corr = {corr:.6f} time={dt:.1f}s")


def test_criterion_7_concentration(ring, shoot, solves):
    ns = [100, 200, 400]
    reps = [shoot(n) for n in ns]
    t = time.perf_counter()
    widths = [_width(r.phi) for r in reps]
    slope = float(np.polyfit(np.log(ns), np.log(widths), 1)[0])
    dist = []
    for n, r in zip(ns, reps):
        w = weber_mode(ring, n, 1).on_r(r.phi.r, ring.r0, n)
        q = trapz_weights(r.phi.r)
        dist.append(n**0.375 * np.sqrt(np.sum(q * np.abs(r.phi.values - w) ** 2)))
    dt = time.perf_counter() - t + sum(solves.times[("shoot", n, 1)] for n in ns)
    mono = bool(np.all(np.diff(dist) < 0))
    ok = abs(slope + 0.75) <= 0.05 and mono and dt < 120
    record(7, ok, f"width slope={slope:.3f} n^(3/8)||phi-w||={np.array2string(np.array(dist), precision=4)} "
                  f"time={dt:.1f}s")


def test_criterion_8_criteria_consistency(batchelor, ring, shoot, glue):
    modes = [(n, 1, shoot(n).omega) for n in (50, 100, 200, 400)]
    modes += [(200, 2, shoot(200, 2).omega), (30, 1, shoot(30).omega)]
    modes += [(200, m, glue(200, m).omega) for m in (1, 2)]
    t = time.perf_counter()
    bound = howard_gupta_growth_bound(batchelor, ring)
    inside = []
    for n, _, om in modes:
        sc = semicircle(batchelor, ring, n)
        inside.append(sc.contains(om, margin=1e-6) and om.imag < bound)
    r = scan_grid()
    hg = howard_gupta_pointwise(batchelor, 100, 100 * ring.beta, r)
    dt = time.perf_counter() - t
    ok = all(inside) and len(r) == 10_000 and bool(np.all(hg < 0)) and dt < 5
    record(8, ok, f"{sum(inside)}/{len(inside)} modes inside, HG bound={bound:.5f}, "
                  f"max HG LHS={hg.max():.2e} time={dt:.2f}s")


_P = BatchelorProfile(0.25)
_R = locate_batchelor(0.25)


@settings(derandomize=True, max_examples=60, deadline=None)
@given(st.floats(0.05, 6.0), st.floats(-40.0, 40.0), st.floats(1e-3, 1.0), st.integers(2, 800))
def _conjugation(r, re, im, n):
    k1 = eval_potential_k(_P, PotentialParams(_R.beta, n, complex(re, im)), np.array([r]))[0]
    k2 = eval_potential_k(_P, PotentialParams(_R.beta, n, complex(re, -im)), np.array([r]))[0]
    assert abs(k2 - np.conj(k1)) <= 1e-12 * max(1.0, abs(k1))


@settings(derandomize=True, max_examples=60, deadline=None)
@given(st.integers(2, 5000), st.integers(1, 20))
def _quantization(n, m):
    tc = taylor_coeffs(_R, n, m)
    assert abs(tc.k0 + (2 * m - 1) * tc.k2_sqrt) <= 1e-12 * abs(tc.k0)


def test_criterion_9_invariants(glue):
    failures = []
    for name, prop in (("conjugation", _conjugation), ("quantization", _quantization)):
        try:
            prop()
        except AssertionError as exc:
            failures.append(f"{name}: {exc}")
    sols = [glue(200, m) for m in (1, 2)]
    c = max(s.contraction for s in sols)
    wind = [s.winding for s in sols]
    res = max(s.pde_residual for s in sols)
    ok = not failures and c <= 0.5 and wind == [1, 1] and res < 1e-6
    record(9, ok, f"contraction={c:.3f} winding={wind} pde_residual={res:.2e} "
                  f"properties={'ok' if not failures else failures}")
