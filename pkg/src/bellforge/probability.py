"""Bell expressions written as weighted sums of joint outcome probabilities.

A condition "sum_k sign_k * o_k = r (mod d)" ranges over the parties named
in ``choices``; parties with choice ``None`` are ignored (marginalized).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import dagger, is_unitary
from .numeric import POLICY, ContractError, UnknownNameError
from .states import PureState


@dataclass(frozen=True)
class ProbTerm:
    weight: float
    choices: tuple[int, ...]
    signs: tuple[int, ...]
    residue: int

    def to_dict(self) -> dict:
        return {"weight": self.weight, "choices": list(self.choices),
                "signs": list(self.signs), "residue": self.residue}


@dataclass(frozen=True)
class ProbabilityExpression:
    n: int
    s: int
    d: int
    terms: tuple[ProbTerm, ...]
    bound: float
    name: str = ""

    def __post_init__(self):
        for t in self.terms:
            if not np.isfinite(t.weight):
                raise ValueError("weights must be finite")
            if len(t.choices) != self.n or len(t.signs) != self.n:
                raise ValueError(f"term {t} does not cover {self.n} parties")
            if any(c < 0 or c >= self.s for c in t.choices):
                raise ValueError(f"term {t} references a setting outside 0..{self.s - 1}")
            if any(sg not in (-1, 0, 1) for sg in t.signs):
                raise ValueError(f"term {t} has a sign outside -1, 0, 1")

    def to_dict(self) -> dict:
        return {"name": self.name, "n": self.n, "s": self.s, "d": self.d, "bound": self.bound,
                "terms": [t.to_dict() for t in self.terms]}


def expression_from_dict(data) -> ProbabilityExpression:
    if isinstance(data, list):
        data = {"terms": data}
    terms = tuple(
        ProbTerm(float(t["weight"]), tuple(int(c) for c in t["choices"]),
                 tuple(int(sg) for sg in t["signs"]), int(t["residue"]))
        for t in data["terms"]
    )
    if not terms:
        raise ValueError("expression has no terms")
    n = len(terms[0].choices)
    s = int(data.get("s", max(max(t.choices) for t in terms) + 1))
    return ProbabilityExpression(n, s, int(data.get("d", 3)), terms,
                                 float(data.get("bound", np.nan)), data.get("name", "json"))


@dataclass(frozen=True)
class MeasurementBases:
    """bases[k][x] is a unitary whose column m is the vector for outcome m of party k, setting x."""

    bases: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        frozen = []
        for k, party in enumerate(self.bases):
            row = []
            for x, b in enumerate(party):
                b = np.array(b, dtype=complex)
                if b.ndim != 2 or b.shape[0] != b.shape[1]:
                    raise ValueError(f"basis ({k},{x}) must be square")
                if not is_unitary(b, POLICY.unitary):
                    raise ContractError(f"basis ({k},{x}) is not orthonormal")
                b.setflags(write=False)
                row.append(b)
            frozen.append(tuple(row))
        object.__setattr__(self, "bases", tuple(frozen))

    @property
    def n(self) -> int:
        return len(self.bases)

    @property
    def d(self) -> int:
        return self.bases[0][0].shape[0]

    def rotated(self, frames) -> "MeasurementBases":
        """Bases seen from local frames: column vectors become frame^+ @ basis."""
        return MeasurementBases(tuple(tuple(dagger(f) @ b for b in party)
                                      for f, party in zip(frames, self.bases)))


def outcome_distribution(psi: PureState, bases: MeasurementBases, choices) -> np.ndarray:
    """Joint outcome probabilities, shape (d,) * n, for one setting per party."""
    if bases.n != psi.n or bases.d != psi.d:
        raise ValueError("bases and state disagree on parties or dimension")
    t = psi.tensor()
    for k, x in enumerate(choices):
        b = bases.bases[k][x]
        t = np.moveaxis(np.tensordot(np.conj(b).T, t, axes=([1], [k])), 0, k)
    return np.abs(t) ** 2


def joint_probability(psi: PureState, bases: MeasurementBases, choices, outcomes) -> float:
    return float(outcome_distribution(psi, bases, choices)[tuple(outcomes)])


def _condition_mask(d: int, signs, residue: int) -> np.ndarray:
    grids = np.indices((d,) * len(signs))
    total = sum(sg * g for sg, g in zip(signs, grids))
    return (total - residue) % d == 0


def evaluate_expression(expr: ProbabilityExpression, psi: PureState, bases: MeasurementBases) -> float:
    if expr.d != psi.d or expr.n != psi.n:
        raise ValueError("expression and state disagree on parties or dimension")
    total = 0.0
    cache: dict[tuple, np.ndarray] = {}
    for t in expr.terms:
        if t.choices not in cache:
            cache[t.choices] = outcome_distribution(psi, bases, t.choices)
        total += t.weight * float(cache[t.choices][_condition_mask(expr.d, t.signs, t.residue)].sum())
    return total


def evaluate_deterministic(expr: ProbabilityExpression, outcomes) -> float:
    """Expression value for a deterministic strategy, outcomes[k][x] in 0..d-1."""
    o = np.asarray(outcomes)
    total = 0.0
    for t in expr.terms:
        val = sum(sg * o[k, x] for k, (sg, x) in enumerate(zip(t.signs, t.choices)))
        total += t.weight * ((val - t.residue) % expr.d == 0)
    return total


def classical_bound(expr: ProbabilityExpression) -> float:
    """Max over all d^(n s) deterministic strategies (small expressions only)."""
    best = -np.inf
    for flat in itertools.product(range(expr.d), repeat=expr.n * expr.s):
        best = max(best, evaluate_deterministic(expr, np.reshape(flat, (expr.n, expr.s))))
    return best


def expression_operator(expr: ProbabilityExpression, bases: MeasurementBases) -> np.ndarray:
    """Hermitian operator whose expectation equals ``evaluate_expression`` for every state."""
    d, n = expr.d, expr.n
    op = np.zeros((d**n, d**n), dtype=complex)
    for t in expr.terms:
        mask = _condition_mask(d, t.signs, t.residue)
        for outcome in zip(*np.nonzero(mask)):
            vec = np.array([1.0 + 0j])
            for k in range(n):
                vec = np.kron(vec, bases.bases[k][t.choices[k]][:, outcome[k]])
            op += t.weight * np.outer(vec, np.conj(vec))
    return op


def cglmp_terms(d: int) -> tuple[ProbTerm, ...]:
    terms = []
    for k in range(d // 2):
        c = 1 - 2 * k / (d - 1)
        terms += [
            ProbTerm(c, (0, 0), (1, -1), k % d),
            ProbTerm(c, (1, 0), (-1, 1), (k + 1) % d),
            ProbTerm(c, (1, 1), (1, -1), k % d),
            ProbTerm(c, (0, 1), (-1, 1), k % d),
            ProbTerm(-c, (0, 0), (1, -1), (-k - 1) % d),
            ProbTerm(-c, (1, 0), (-1, 1), (-k) % d),
            ProbTerm(-c, (1, 1), (1, -1), (-k - 1) % d),
            ProbTerm(-c, (0, 1), (-1, 1), (-k - 1) % d),
        ]
    return tuple(terms)


def _acin_terms(weight: float) -> tuple[ProbTerm, ...]:
    plus = (1, 1, 1)
    return tuple(ProbTerm(wt, ch, plus, r) for wt, ch, r in [
        (1, (0, 0, 0), 0), (1, (0, 1, 1), 1), (1, (1, 0, 1), 1), (1, (1, 1, 0), 1),
        (weight, (1, 1, 1), 0), (-1, (1, 0, 0), 2), (-1, (0, 1, 0), 2), (-1, (0, 0, 1), 2),
    ])


PROBABILITY_NAMES = ("cglmp:d", "acin333", "acin333:printed")


def probability_catalog(name: str) -> ProbabilityExpression:
    key, _, arg = name.strip().lower().partition(":")
    if key == "cglmp":
        try:
            d = int(arg)
        except ValueError:
            raise UnknownNameError(f"cglmp needs an outcome count, got {name!r}") from None
        if d < 3:
            raise ValueError("cglmp:d needs d >= 3")
        return ProbabilityExpression(2, 2, d, cglmp_terms(d), 2.0, f"cglmp:{d}")
    if key == "acin333":
        if not arg:
            # +2 on p(a'+b'+c'=0) is the weight that matches the operator form I + 2/3 [...]_H
            return ProbabilityExpression(3, 2, 3, _acin_terms(2.0), 3.0, "acin333")
        if arg == "printed":
            return ProbabilityExpression(3, 2, 3, _acin_terms(-2.0), 3.0, "acin333:printed")
    raise UnknownNameError(f"unknown probability expression {name!r}; known: {', '.join(PROBABILITY_NAMES)}")


def cglmp_bases(d: int) -> MeasurementBases:
    """Phase-then-Fourier bases: phases alpha = 0, 1/2 for Alice and beta = 1/4, -1/4 for Bob."""
    j = np.arange(d)[:, None]
    m = np.arange(d)[None, :]

    def basis(phase, sign):
        return np.exp(2j * np.pi / d * j * (sign * m + phase)) / np.sqrt(d)

    return MeasurementBases((
        (basis(0.0, 1), basis(0.5, 1)),
        (basis(0.25, -1), basis(-0.25, -1)),
    ))


def setting_outcome_values(alphabet: str, d: int) -> np.ndarray:
    if alphabet == "pm1":
        return np.array([1.0, -1.0])
    if alphabet == "residue":
        return np.array([0.0, 1.0, -1.0])
    return np.exp(2j * np.pi * np.arange(d) / d)


def basis_of_setting(matrix: np.ndarray, alphabet: str = "roots") -> np.ndarray:
    """Eigenbasis ordered by outcome: column m has eigenvalue alphabet[m]."""
    from .operators import eigenbasis

    m = np.asarray(matrix, dtype=complex)
    d = m.shape[0]
    vals, vecs = eigenbasis(m)
    targets = setting_outcome_values(alphabet, d)
    cols = []
    for t in targets:
        i = int(np.argmin(np.abs(vals - t)))
        if abs(vals[i] - t) > 1e-6:
            raise ContractError(f"setting has no eigenvalue {t}; spectrum does not match the alphabet")
        cols.append(i)
    if len(set(cols)) != d:
        raise ContractError("setting spectrum is degenerate; outcome basis ambiguous")
    return vecs[:, cols]


def bases_from_settings(settings, alphabet: str = "roots") -> MeasurementBases:
    from .polynomial import settings_matrices

    return MeasurementBases(tuple(tuple(basis_of_setting(m, alphabet) for m in party)
                                  for party in settings_matrices(settings)))


@lru_cache(maxsize=1)
def _acin_setup():
    from .operators import gell_mann
    from .states import PureState, ghz_frame

    l3 = gell_mann(3).matrix
    lp = (gell_mann(2).matrix + gell_mann(4).matrix + gell_mann(6).matrix) / np.sqrt(3)
    e3 = np.linalg.eigh(l3)[1]
    ep = np.linalg.eigh(lp)[1]
    # outcome labelling of the ascending eigenvectors that attains the optimum
    party = (e3[:, [0, 1, 2]], ep[:, [1, 0, 2]])
    bases = MeasurementBases((party,) * 3)
    op = expression_operator(probability_catalog("acin333"), bases)
    vals, vecs = np.linalg.eigh(op)
    frames, coef, _ = ghz_frame(PureState.normalized(3, 3, vecs[:, -1]))
    return bases, frames, float(coef[1] / coef[0]), float(vals[-1])


def acin_bases(aligned: bool = True) -> MeasurementBases:
    """Gell-Mann eigenbases (lambda_3 and (lambda_2 + lambda_4 + lambda_6)/sqrt3) for acin333.

    With ``aligned`` the bases are expressed in the local frames where the optimal
    state is the computational quasi-GHZ state.
    """
    bases, frames, _, _ = _acin_setup()
    return bases.rotated(frames) if aligned else bases


def acin_optimum() -> tuple[float, float]:
    """(gamma, top eigenvalue) of the acin333 operator at the Gell-Mann bases."""
    _, _, gamma, value = _acin_setup()
    return gamma, value
