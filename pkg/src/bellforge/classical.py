"""Exact local-hidden-variable bounds by enumerating deterministic strategies.

Shared randomness cannot beat the best deterministic strategy (the local set is
the convex hull of deterministic points), so enumeration gives the exact bound.

Strategies are ordered by a mixed-radix counter: party 0 is the most significant
digit, and within a party the setting-0 outcome is most significant. Values are
accumulated elementwise in a fixed order, so the result does not depend on how
the strategy space is chunked.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .numeric import ENUMERATION_GUARD, POLICY, CapacityError, max_workers
from .polynomial import BellPolynomial, Objective

OBJECTIVES: tuple[Objective, ...] = ("Hmax", "Hmin", "Amax", "Amin")


def outcome_values(p: BellPolynomial) -> np.ndarray:
    if p.alphabet == "pm1":
        return np.array([1.0, -1.0], dtype=complex)
    if p.alphabet == "residue":
        return np.array([0.0, 1.0, -1.0], dtype=complex)
    return np.exp(2j * np.pi * np.arange(p.d) / p.d)


@dataclass(frozen=True)
class DeterministicStrategy:
    outcomes: np.ndarray = field(repr=False)
    d: int = 3

    def __post_init__(self):
        o = np.array(self.outcomes, dtype=int)
        if o.ndim != 2:
            raise ValueError("outcomes must be an n x s matrix")
        if o.size and (o.min() < 0 or o.max() >= self.d):
            raise ValueError(f"outcomes must lie in 0..{self.d - 1}")
        o.setflags(write=False)
        object.__setattr__(self, "outcomes", o)

    @classmethod
    def from_index(cls, index: int, n: int, s: int, d: int) -> "DeterministicStrategy":
        digits = np.unravel_index(index, (d,) * (n * s))
        return cls(np.array(digits).reshape(n, s), d)

    def index(self) -> int:
        n, s = self.outcomes.shape
        return int(np.ravel_multi_index(tuple(self.outcomes.reshape(-1)), (self.d,) * (n * s)))

    def to_list(self) -> list[list[int]]:
        return self.outcomes.tolist()


def strategy_value(p: BellPolynomial, strat: DeterministicStrategy) -> complex:
    """scale * sum_j c_j prod_k v(o[k][j_k])^power_k + offset."""
    o = strat.outcomes
    if o.shape != (p.n, p.s) or strat.d != p.d:
        raise ValueError(f"strategy shape {o.shape} does not match polynomial ({p.n}, {p.s})")
    v = outcome_values(p)
    total = 0j
    for term in p.terms:
        for idx in itertools.product(range(p.s), repeat=p.n):
            c = term.coeffs[idx]
            if c == 0:
                continue
            prod = c
            for k, j in enumerate(idx):
                prod = prod * v[o[k, j]] ** term.powers[k]
            total += prod
    return p.scale * total + p.offset


def strategy_count(p: BellPolynomial) -> int:
    return p.d ** (p.n * p.s)


def _local_table(p: BellPolynomial) -> np.ndarray:
    """(d^s, s) outcome values of every local deterministic strategy."""
    loc = np.array(list(itertools.product(range(p.d), repeat=p.s)))
    return outcome_values(p)[loc]


def _chunk_values(p: BellPolynomial, table: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Polynomial values for strategies whose party-0 local index lies in [lo, hi)."""
    L = table.shape[0]
    out = np.zeros((hi - lo,) + (L,) * (p.n - 1), dtype=complex)
    for term in p.terms:
        cols = [table ** pw for pw in term.powers]
        for idx in itertools.product(range(p.s), repeat=p.n):
            c = term.coeffs[idx]
            if c == 0:
                continue
            acc = c * cols[0][lo:hi, idx[0]]
            for k in range(1, p.n):
                acc = np.multiply.outer(acc, cols[k][:, idx[k]])
            out += acc
    return p.scale * out.reshape(hi - lo, -1) + p.offset


def _extremes(vals: np.ndarray, objectives) -> dict:
    res = {}
    for obj in objectives:
        part = vals.real if obj[0] == "H" else vals.imag
        i = int(np.argmax(part)) if obj.endswith("max") else int(np.argmin(part))
        res[obj] = (float(part.reshape(-1)[i]), i)
    return res


def _enumerate(p: BellPolynomial, objectives, guard: int, chunks: int | None, workers: int | None):
    count = strategy_count(p)
    if count > guard:
        raise CapacityError(f"{p.name or 'polynomial'} needs {count} deterministic strategies "
                            f"(d^(n*s) = {p.d}^{p.n * p.s}), above the guard {guard}")
    table = _local_table(p)
    L = table.shape[0]
    per_party0 = count // L
    if chunks is None:
        chunks = min(L, max(1, count // 50000))
    chunks = max(1, min(int(chunks), L))
    edges = np.linspace(0, L, chunks + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    def job(span):
        lo, hi = span
        ext = _extremes(_chunk_values(p, table, lo, hi), objectives)
        return {k: (v, lo * per_party0 + i) for k, (v, i) in ext.items()}

    nw = max_workers(workers)
    if nw > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            results = list(ex.map(job, spans))
    else:
        results = [job(sp) for sp in spans]

    best = {}
    for obj in objectives:
        sign = 1 if obj.endswith("max") else -1
        val, idx = results[0][obj]
        # spans are in counter order, so strict improvement keeps the first witness
        for r in results[1:]:
            v, i = r[obj]
            if sign * v > sign * val:
                val, idx = v, i
        best[obj] = (val, DeterministicStrategy.from_index(idx, p.n, p.s, p.d))
    return best, count


def enumerate_bound(p: BellPolynomial, objective: Objective = "Hmax", guard: int = ENUMERATION_GUARD,
                    chunks: int | None = None, workers: int | None = None):
    """Exact extremum of Re (H objectives) or Im (A objectives) of the strategy value."""
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    best, _ = _enumerate(p, (objective,), guard, chunks, workers)
    return best[objective]


@dataclass(frozen=True)
class ClassicalReport:
    name: str
    values: dict[str, float]
    witnesses: dict[str, DeterministicStrategy]
    count: int
    bold: str
    display_scale: float = 1.0

    @property
    def Hmax(self) -> float:
        return self.values["Hmax"]

    @property
    def Hmin(self) -> float:
        return self.values["Hmin"]

    @property
    def Amax(self) -> float:
        return self.values["Amax"]

    @property
    def Amin(self) -> float:
        return self.values["Amin"]

    @property
    def bold_value(self) -> float:
        return self.values[self.bold]

    def pattern_flags(self, tol: float = POLICY.exact) -> dict[str, bool]:
        part = self.bold[0]
        mx, mn = self.values[part + "max"], self.values[part + "min"]
        other = "A" if part == "H" else "H"
        omax = self.values[other + "max"]
        sqrt3 = min(mx, omax) > 0 and abs(max(mx, omax) / min(mx, omax) - np.sqrt(3)) <= tol
        return {
            "min_is_minus_two_max": bool(abs(mn + 2 * mx) <= tol),
            "sqrt3_between_maxima": bool(sqrt3),
        }

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "strategies": self.count,
            "bold": self.bold,
            "display_scale": self.display_scale,
            "values": {k: v * self.display_scale for k, v in self.values.items()},
            "witnesses": {k: w.to_list() for k, w in self.witnesses.items()},
            "patterns": self.pattern_flags(),
        }


def classical_report(p: BellPolynomial, guard: int = ENUMERATION_GUARD, chunks: int | None = None,
                     workers: int | None = None) -> ClassicalReport:
    best, count = _enumerate(p, OBJECTIVES, guard, chunks, workers)
    return ClassicalReport(p.name, {k: v for k, (v, _) in best.items()},
                           {k: w for k, (_, w) in best.items()}, count, p.bold, p.display_scale)
