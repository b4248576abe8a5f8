import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from scatterbound import assemble, build_grid, plane_wave
from scatterbound.alpha import contrast_bounds
from scatterbound.forward import reference_field

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Instance:
    """Operator, incident wave and reference field for one (pol, R, dx, chi0)."""

    def __init__(self, pol, radius, spacing, chi0, wavelength=1.0):
        self.grid = build_grid(wavelength, radius, spacing)
        self.G = assemble(self.grid, pol)
        self.E_inc = plane_wave(self.grid, pol)
        self.lower, self.upper = contrast_bounds(chi0)
        self.E_ref = reference_field(self.G, (self.lower + self.upper) / 2, self.E_inc)
        self.n = self.grid.n_pixels


@pytest.fixture(scope="session")
def make_instance():
    cache = {}

    def make(pol, radius, spacing, chi0):
        key = (pol, radius, spacing, chi0)
        if key not in cache:
            cache[key] = Instance(*key)
        return cache[key]

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}"
        if detail:
            line += f" [{detail}]"
        lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[-1])):
            terminalreporter.write_line(line)
