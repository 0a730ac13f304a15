"""The same mode from three independent solvers.

Gluing and shooting at n = 200, then the modal operator against shooting at
n = 30. Takes about a minute on one core.
"""

from vortexray import BatchelorProfile, locate_batchelor
from vortexray.gluing import reduced_equation_solve
from vortexray.modal import assemble, most_unstable
from vortexray.shooting import eigen_solve

profile = BatchelorProfile(0.25)
ring = locate_batchelor(0.25)

for m in (1, 2):
    s = eigen_solve(profile, ring, 200, m)
    g = reduced_equation_solve(profile, ring, 200, m)
    print(f"m = {m}: shooting {s.omega:.12f}  gluing {g.omega:.12f}  "
          f"rel diff {abs(s.omega - g.omega) / abs(s.omega):.1e}  contraction {g.contraction:.3f}")

M = assemble(profile, 30, 30 * ring.beta, 512, r_center=ring.r0)
lam = most_unstable(M)[0]
om = eigen_solve(profile, ring, 30, 1).omega
print(f"n = 30: modal lambda {lam:.8f}  -i omega_shoot {-1j * om:.8f}")
