"""Write the figure data (CSV plus plotting script) into ./figures."""

from vortexray import BatchelorProfile, locate_batchelor
from vortexray.reporting import emit_figure_data
from vortexray.shooting import eigen_solve

ring = locate_batchelor(0.25)
emit_figure_data("semicircle", {"q": 0.25, "n": 100, "ring": ring}, "figures")
emit_figure_data("potential_regimes", {"q": 0.25, "n": 400, "ring": ring}, "figures")
rep = eigen_solve(BatchelorProfile(0.25), ring, 100, 2)
out = emit_figure_data("mode_profile", {"q": 0.25, "n": 100, "m": 2, "ring": ring, "report": rep},
                       "figures")
print("wrote", out["csv"].parent)
