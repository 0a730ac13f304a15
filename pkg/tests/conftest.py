import time

import pytest
from hypothesis import settings

from vortexray import BatchelorProfile, locate_batchelor

settings.register_profile("fixed", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("fixed")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def batchelor():
    return BatchelorProfile(0.25)


@pytest.fixture(scope="session")
def ring():
    return locate_batchelor(0.25)


class _Timed:
    """Memoized expensive solves with the wall time of the first call."""

    def __init__(self):
        self.values, self.times = {}, {}

    def get(self, key, fn):
        if key not in self.values:
            t = time.perf_counter()
            self.values[key] = fn()
            self.times[key] = time.perf_counter() - t
        return self.values[key]


@pytest.fixture(scope="session")
def solves():
    return _Timed()


@pytest.fixture(scope="session")
def shoot(batchelor, ring, solves):
    from vortexray.shooting import eigen_solve

    def run(n, m=1):
        return solves.get(("shoot", n, m), lambda: eigen_solve(batchelor, ring, n, m))
    return run


@pytest.fixture(scope="session")
def glue(batchelor, ring, solves):
    from vortexray.gluing import reduced_equation_solve

    def run(n, m=1):
        return solves.get(("glue", n, m), lambda: reduced_equation_solve(batchelor, ring, n, m))
    return run


@pytest.fixture(scope="session")
def modal30(batchelor, ring, solves):
    from vortexray.modal import assemble, most_unstable

    def run(N_g=1024):
        def go():
            M = assemble(batchelor, 30, 30 * ring.beta, N_g, r_center=ring.r0)
            return M, most_unstable(M, return_spectrum=True)
        return solves.get(("modal", N_g), go)
    return run
