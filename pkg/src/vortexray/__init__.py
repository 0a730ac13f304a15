"""Ring-mode instabilities of vortex columns.

Subpackages by task:

* :mod:`vortexray.profiles`: base flows and the Rayleigh potential.
* :mod:`vortexray.ring`: ring radius and wavenumber ratio.
* :mod:`vortexray.asymptotics`: large-n eigenvalue and Weber functions.
* :mod:`vortexray.shooting`: Riccati-Magnus shooting solver.
* :mod:`vortexray.gluing`: inner-outer gluing solver.
* :mod:`vortexray.criteria`: classical stability criteria.
* :mod:`vortexray.modal`: discretized linearized Euler operator.
* :mod:`vortexray.reporting` and :mod:`vortexray.cli`: sweeps, figures, CLI.
"""

from .errors import NumericalError, ValidationError, VortexRayError
from .profiles import BatchelorProfile, TabulatedProfile, load_profile
from .ring import RingGeometry, locate_batchelor, locate_general

__version__ = "0.1.0"

__all__ = [
    "VortexRayError",
    "ValidationError",
    "NumericalError",
    "BatchelorProfile",
    "TabulatedProfile",
    "load_profile",
    "RingGeometry",
    "locate_batchelor",
    "locate_general",
]
