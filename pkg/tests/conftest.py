import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from muskatlab.grid import Grid, InterfaceField

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("default")


def smooth_field(grid, amp=0.1, seed=0, kmax=3):
    """Random band-limited real field, scaled to ``amp`` in the sup norm."""
    rng = np.random.default_rng(seed)
    m = grid.integer_wavenumbers
    mask = np.ones(grid.shape, dtype=bool)
    for mi in m:
        mask &= np.abs(mi) <= kmax
    mask &= sum(np.abs(mi) for mi in m) > 0
    c = np.zeros(grid.shape, dtype=complex)
    c[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    v = np.fft.ifftn(c).real
    return InterfaceField(grid, amp * v / np.abs(v).max())


@pytest.fixture
def grid2():
    return Grid(2, 32)


@pytest.fixture
def grid1():
    return Grid(1, 128)
