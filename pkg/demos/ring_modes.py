"""Ring geometry, asymptotic eigenvalues and shooting solves for q = 0.25."""

from vortexray import BatchelorProfile, locate_batchelor
from vortexray.asymptotics import omega_asymptotic
from vortexray.shooting import eigen_solve

profile = BatchelorProfile(0.25)
ring = locate_batchelor(0.25)
print(f"r0 = {ring.r0:.6f}, beta = {ring.beta:.6f}, sqrt(b0) = {ring.sqrt_b0:.6f}")

for n in (50, 100, 200, 400):
    rep = eigen_solve(profile, ring, n, 1)
    asym = omega_asymptotic(ring, n, 1)
    print(f"n = {n:4d}  omega = {rep.omega:.10f}  |omega - omega_asym| = {abs(rep.omega - asym):.3e}"
          f"  width = {rep.concentration['width']:.5f}")
