"""Tolerance policy and error types shared across the package."""

from __future__ import annotations

import os
from dataclasses import dataclass


class BellforgeError(Exception):
    """Base class for package errors."""


class ContractError(BellforgeError, ValueError):
    """An input violated a documented precondition (e.g. non-hermitian operator)."""


class CapacityError(BellforgeError, RuntimeError):
    """A request exceeds the configured enumeration or dimension limits."""


class UnknownNameError(BellforgeError, KeyError):
    """A registry lookup failed."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


@dataclass(frozen=True)
class Tolerances:
    state_norm: float = 1e-12
    hermitian: float = 1e-10
    hermitian_setting: float = 1e-12
    trace: float = 1e-10
    psd: float = 1e-10
    unitary: float = 1e-10
    eig_residual: float = 1e-8
    reconstruct: float = 1e-14
    bracket: float = 1e-12
    mub: float = 1e-8
    nilpotent: float = 1e-12
    identity: float = 1e-10
    # classical extrema are closed forms; compared at double-rounding level
    exact: float = 1e-9
    golden_section: float = 1e-6


POLICY = Tolerances()

# d**n cap for dense eigensolves (n=6 qutrits)
MAX_DIMENSION = 729
# default cap on d**(n*s) deterministic strategies
ENUMERATION_GUARD = 10**8


def max_workers(default: int | None = None) -> int:
    """Worker count for thread pools, capped by ``BELLFORGE_THREADS``."""
    cpu = os.cpu_count() or 1
    n = default if default is not None else cpu
    env = os.environ.get("BELLFORGE_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return max(1, n)
