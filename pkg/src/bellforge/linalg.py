"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays. Party 0 is always the leftmost tensor
factor, so ``kron([a, b])`` is ``a (x) b`` and basis index ``|i1 ... in>`` maps
to ``sum(ik * d**(n-k))``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from functools import reduce
from typing import Literal

import numpy as np
import scipy.linalg

from .numeric import POLICY, CapacityError, ContractError, MAX_DIMENSION

BracketKind = Literal["commutator", "anticommutator", "complex_anticommutator"]


def _square(m: np.ndarray, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be square, got shape {m.shape}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of ``factors`` in list order."""
    factors = list(factors)
    if not factors:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f) for f in factors))


def hermiticity_defect(m: np.ndarray) -> float:
    m = _square(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))))


def is_hermitian(m: np.ndarray, tol: float = POLICY.hermitian) -> bool:
    return hermiticity_defect(m) <= tol


def is_unitary(m: np.ndarray, tol: float = POLICY.unitary) -> bool:
    m = _square(m)
    return bool(np.max(np.abs(m @ dagger(m) - np.eye(m.shape[0]))) <= tol)


def split_parts(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian and anti-hermitian parts, ``m = H + 1j * A``."""
    m = _square(m)
    md = dagger(m)
    return (m + md) / 2, (m - md) / 2j


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return split_parts(m)[0]


def antihermitian_part(m: np.ndarray) -> np.ndarray:
    return split_parts(m)[1]


def bracket(kind: BracketKind, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Commutator ``PQ - QP``, anticommutator ``PQ + QP`` or ``PQ^+ + QP^+``."""
    p = _square(p)
    q = _square(q)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    if kind == "commutator":
        return p @ q - q @ p
    if kind == "anticommutator":
        return p @ q + q @ p
    if kind == "complex_anticommutator":
        return p @ dagger(q) + q @ dagger(p)
    raise ValueError(f"unknown bracket kind {kind!r}")


def commutator(p, q):
    return bracket("commutator", p, q)


def anticommutator(p, q):
    return bracket("anticommutator", p, q)


def complex_anticommutator(p, q):
    return bracket("complex_anticommutator", p, q)


def check_dimension(dim: int) -> None:
    if dim > MAX_DIMENSION:
        raise CapacityError(
            f"Hilbert dimension {dim} exceeds the dense eigensolver cap {MAX_DIMENSION}"
        )


def max_eigenpair(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a hermitian matrix and a unit eigenvector.

    Raises ContractError if ``h`` is not hermitian within the policy tolerance
    (scaled by the matrix norm for large entries).
    """
    h = _square(h, "operator")
    check_dimension(h.shape[0])
    norm = float(np.linalg.norm(h, 2)) if h.size else 0.0
    if hermiticity_defect(h) > POLICY.hermitian * max(1.0, norm):
        raise ContractError("max_eigenpair needs a hermitian operator")
    hs = (h + dagger(h)) / 2
    n = hs.shape[0]
    vals, vecs = scipy.linalg.eigh(hs, subset_by_index=[n - 1, n - 1])
    lam = float(vals[0])
    v = vecs[:, 0]
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(hs @ v - lam * v))
    if residual > POLICY.eig_residual * max(1.0, norm):
        raise ContractError(f"eigenpair residual {residual:.3e} above bound")
    return lam, v


def spectrum(h: np.ndarray) -> np.ndarray:
    h = _square(h)
    return np.linalg.eigvalsh((h + dagger(h)) / 2)


def _local_count(dim: int, d: int) -> int:
    n = round(np.log(dim) / np.log(d)) if dim > 1 else 0
    if d**n != dim:
        raise ValueError(f"dimension {dim} is not a power of {d}")
    return n


def partial_trace(rho: np.ndarray, keep: Iterable[int], n: int, d: int) -> np.ndarray:
    """Reduce an ``n``-party density matrix to the parties in ``keep``."""
    rho = _square(rho, "density matrix")
    if rho.shape[0] != d**n:
        raise ValueError(f"dimension {rho.shape[0]} is not {d}**{n}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep={keep} outside 0..{n - 1}")
    t = rho.reshape((d,) * (2 * n))
    traced = [k for k in range(n) if k not in keep]
    # trace from the highest axis down so lower indices stay valid
    m = n
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + m)
        m -= 1
    dk = d ** len(keep)
    return t.reshape(dk, dk)


def reduced_state(psi: np.ndarray, keep: Iterable[int], n: int, d: int) -> np.ndarray:
    """Reduced density matrix of a pure state vector, without forming ``|psi><psi|``."""
    psi = np.asarray(psi)
    if psi.shape != (d**n,):
        raise ValueError(f"state of shape {psi.shape} is not a vector of dimension {d}**{n}")
    keep = sorted(set(keep))
    rest = [k for k in range(n) if k not in keep]
    t = psi.reshape((d,) * n).transpose(keep + rest).reshape(d ** len(keep), -1)
    return t @ dagger(t)


def purity(rho: np.ndarray) -> float:
    rho = _square(rho, "density matrix")
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def check_density(rho: np.ndarray) -> None:
    rho = _square(rho, "density matrix")
    if hermiticity_defect(rho) > POLICY.hermitian:
        raise ContractError("density matrix is not hermitian")
    if abs(np.trace(rho) - 1) > POLICY.trace:
        raise ContractError("density matrix trace differs from 1")
    if spectrum(rho)[0] < -POLICY.psd:
        raise ContractError("density matrix has a negative eigenvalue")


def nilpotency_defect(m: np.ndarray) -> tuple[float, int]:
    """``min_k ||M^k|| / ||M||^k`` over ``k <= dim`` and the first ``k`` achieving it.

    Zero means nilpotent. Values below the policy tolerance are reported as 0.
    """
    m = _square(m)
    base = float(np.linalg.norm(m, 2))
    if base == 0.0:
        return 0.0, 1
    best, best_k = np.inf, 1
    power = np.eye(m.shape[0], dtype=complex)
    for k in range(1, m.shape[0] + 1):
        power = power @ m
        ratio = float(np.linalg.norm(power, 2)) / base**k
        if ratio <= POLICY.nilpotent:
            return 0.0, k
        if ratio < best - 1e-15:
            best, best_k = ratio, k
    return best, best_k


# JSON interchange: complex entries as [re, im] pairs, row-major nesting.

def to_json_array(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [to_json_array(x) for x in a]


def from_json_array(data) -> np.ndarray:
    def walk(x):
        if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, (int, float)) for v in x
        ):
            return complex(x[0], x[1])
        if isinstance(x, (list, tuple)):
            return [walk(v) for v in x]
        if isinstance(x, (int, float)):
            return complex(x)
        raise ValueError(f"cannot decode {x!r} as a complex entry")

    return np.array(walk(data), dtype=complex)
