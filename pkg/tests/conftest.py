import functools
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import unitary_group

settings.register_profile("bellforge", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("bellforge")


def random_matrix(rng, dim):
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def random_unitary(rng, dim):
    return unitary_group.rvs(dim, random_state=rng)


def random_involution(rng, dim=2):
    u = random_unitary(rng, dim)
    signs = np.where(np.arange(dim) < dim // 2, 1.0, -1.0)
    return u @ np.diag(signs) @ u.conj().T


def random_root_unitary(rng, d):
    u = random_unitary(rng, d)
    return u @ np.diag(np.exp(2j * np.pi * np.arange(d) / d)) @ u.conj().T


def random_state_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@functools.lru_cache(maxsize=None)
def reproduced(table):
    """One reproduction run per table per session, shared by the reproduction and acceptance tests."""
    from bellforge.reproduce import reproduce

    return reproduce(table, seed=7)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
