"""Bell polynomials: coefficient tensors over setting choices, the named catalog, and operator assembly.

A polynomial is a sum of terms. Each term is a coefficient tensor indexed by
one setting choice per party plus a per-party operator power (0 means that
party contributes the identity). Ordinary polynomials have a single term with
all powers 1; squared terms such as ``(ab)^2`` or ``a^2`` use the others.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .linalg import check_dimension, dagger, from_json_array
from .numeric import POLICY, ContractError, UnknownNameError

Part = Literal["hermitian", "antihermitian", "full"]
Alphabet = Literal["roots", "pm1", "residue"]
Objective = Literal["Hmax", "Hmin", "Amax", "Amin"]

W = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class Term:
    coeffs: np.ndarray = field(repr=False)
    powers: tuple[int, ...]

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "powers", tuple(int(p) for p in self.powers))
        if len(self.powers) != c.ndim:
            raise ValueError("one power per party")
        if any(p < 0 for p in self.powers):
            raise ValueError("powers must be non-negative")


@dataclass(frozen=True)
class BellPolynomial:
    n: int
    s: int
    d: int
    terms: tuple[Term, ...]
    part: Part = "hermitian"
    alphabet: Alphabet = "roots"
    scale: float = 1.0
    offset: float = 0.0
    name: str = ""
    # factor between this normalization and the one quoted in reports
    display_scale: float = 1.0
    bold: Objective | None = None

    def __post_init__(self):
        if self.part not in ("hermitian", "antihermitian", "full"):
            raise ValueError(f"unknown part {self.part!r}")
        if self.alphabet not in ("roots", "pm1", "residue"):
            raise ValueError(f"unknown alphabet {self.alphabet!r}")
        if self.scale == 0:
            raise ValueError("scale must be nonzero")
        if self.alphabet == "pm1" and self.d != 2:
            raise ValueError("the +-1 alphabet needs d = 2")
        if self.alphabet == "residue" and self.d != 3:
            raise ValueError("the residue alphabet is defined for d = 3")
        shape = (self.s,) * self.n
        for t in self.terms:
            if t.coeffs.shape != shape:
                raise ValueError(f"term tensor shape {t.coeffs.shape} != {shape}")
        if self.part == "full" and self.alphabet == "roots" and self.d > 2:
            raise ValueError("part 'full' is reserved for real-outcome polynomials")
        if self.bold is None:
            object.__setattr__(self, "bold", "Amax" if self.part == "antihermitian" else "Hmax")

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficient tensor of the single linear term."""
        if len(self.terms) != 1:
            raise ValueError(f"{self.name or 'polynomial'} has {len(self.terms)} terms")
        return self.terms[0].coeffs

    @property
    def is_linear(self) -> bool:
        return all(t.powers == (1,) * self.n for t in self.terms)

    @property
    def setting_flavor(self) -> str:
        return "unitary_root" if self.alphabet == "roots" and self.d > 2 else "hermitian"

    def with_part(self, part: Part) -> "BellPolynomial":
        return replace(self, part=part, bold=None)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "s": self.s,
            "d": self.d,
            "part": self.part,
            "alphabet": self.alphabet,
            "scale": self.scale,
            "offset": self.offset,
            "display_scale": self.display_scale,
            "bold": self.bold,
            "terms": [
                {
                    "powers": list(t.powers),
                    "coeffs": [
                        [list(idx), [float(t.coeffs[idx].real), float(t.coeffs[idx].imag)]]
                        for idx in itertools.product(range(self.s), repeat=self.n)
                        if t.coeffs[idx] != 0
                    ],
                }
                for t in self.terms
            ],
        }


def from_coefficients(n: int, s: int, d: int, coeffs, part: Part = "hermitian", **kw) -> BellPolynomial:
    """Polynomial from a flat (party-0-major) or shaped coefficient list; no normalization."""
    c = np.asarray(coeffs, dtype=complex)
    if c.size != s**n:
        raise ValueError(f"expected {s**n} coefficients, got {c.size}")
    kw.setdefault("alphabet", "pm1" if d == 2 else "roots")
    return BellPolynomial(n, s, d, (Term(c.reshape((s,) * n), (1,) * n),), part, **kw)


def prime_count_tensor(n: int, values: Sequence[complex], s: int = 2) -> np.ndarray:
    """Tensor whose entry depends only on the number of primed settings (index sum for s = 2)."""
    if s != 2:
        raise ValueError("prime-count shorthand is defined for two settings")
    if len(values) != n + 1:
        raise ValueError(f"need {n + 1} prime-count coefficients, got {len(values)}")
    c = np.zeros((2,) * n, dtype=complex)
    for idx in itertools.product(range(2), repeat=n):
        c[idx] = values[sum(idx)]
    return c


def prime_counts(p: BellPolynomial) -> list[complex] | None:
    """Coefficient per prime count, or None if the tensor is not prime-count symmetric."""
    if p.s != 2:
        return None
    c = p.coeffs
    out: list[complex | None] = [None] * (p.n + 1)
    for idx in itertools.product(range(2), repeat=p.n):
        k = sum(idx)
        if out[k] is None:
            out[k] = complex(c[idx])
        elif abs(out[k] - c[idx]) > 1e-12:
            return None
    return out


def _sym(name: str, n: int, values, part: Part, **kw) -> BellPolynomial:
    return BellPolynomial(n, 2, 3, (Term(prime_count_tensor(n, values), (1,) * n),), part,
                          name=name, **kw)


def mermin(n: int) -> BellPolynomial:
    """M_n = 1/2 M_{n-1}(a_n + a'_n) + 1/2 M'_{n-1}(a_n - a'_n), M_1 = a."""
    if n < 1:
        raise ValueError("mermin needs n >= 1")
    m, mp = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    for _ in range(1, n):
        m, mp = (
            0.5 * np.multiply.outer(m, [1, 1]) + 0.5 * np.multiply.outer(mp, [1, -1]),
            0.5 * np.multiply.outer(mp, [1, 1]) + 0.5 * np.multiply.outer(m, [-1, 1]),
        )
    # the recursion halves the n = 2, 3 forms relative to CHSH and the 3-party Mermin operator
    return from_coefficients(n, 2, 2, m, "full", name=f"mermin:{n}",
                             display_scale=2.0 if n in (2, 3) else 1.0)


def _c223h() -> BellPolynomial:
    # hermitian-settings CGLMP; setting index 0 = a (b), 1 = a' (b'); entries [ja][jb]
    def t(powers, entries):
        c = np.zeros((2, 2), dtype=complex)
        for (i, j), v in entries.items():
            c[i, j] = v
        return Term(c, powers)

    q = 0.75
    terms = (
        t((2, 0), {(0, 0): -3}),
        t((0, 2), {(0, 1): -3}),
        t((1, 1), {(0, 0): q, (0, 1): q, (1, 0): -q, (1, 1): q}),
        t((2, 1), {(0, 0): q, (0, 1): -q, (1, 0): -q, (1, 1): q}),
        t((1, 2), {(0, 0): -q, (0, 1): q, (1, 0): q, (1, 1): -q}),
        t((2, 2), {(0, 0): 3 * q, (0, 1): 3 * q, (1, 0): -3 * q, (1, 1): 3 * q}),
    )
    return BellPolynomial(2, 2, 3, terms, "hermitian", "residue", offset=2.0, name="c223h")


def c223h_settings() -> list[list[np.ndarray]]:
    """The Gell-Mann optimal settings for c223h: A = B = lambda_3, A' = B' = 2/3(l1 + l6) + 1/6(l3 + sqrt3 l8)."""
    from .operators import gell_mann

    g = {i: gell_mann(i).matrix for i in (1, 3, 6, 8)}
    a = g[3]
    ap = (2 / 3) * (g[1] + g[6]) + (1 / 6) * (g[3] + np.sqrt(3) * g[8])
    return [[a, ap], [a, ap]]


def roots_of_unity(d: int) -> np.ndarray:
    """w^0..w^(d-1); tensors index this table by exponent mod d so equal phases are bitwise equal."""
    return np.exp(2j * np.pi * np.arange(d) / d)


_R3 = roots_of_unity(3)


def _c233_tensor() -> np.ndarray:
    j = np.arange(3)
    return _R3[np.outer(j, j) % 3]


def _ghz433_tensor() -> np.ndarray:
    c = np.zeros((3,) * 4, dtype=complex)
    for j, k, l, m in itertools.product(range(3), repeat=4):
        c[j, k, l, m] = _R3[j * (k + l + m) % 3]
    return c


def _ame433_tensor(transformed: bool) -> np.ndarray:
    c = np.zeros((3,) * 4, dtype=complex)
    for i, j, k, l in itertools.product(range(3), repeat=4):
        c[i, j, k, l] = _R3[(j * (i - k) + l * (i + k)) % 3]
    if transformed:
        # d' -> w d', then d' <-> d''
        c[:, :, :, 1] *= W
        c = c[:, :, :, [0, 2, 1]]
    return c


def c22d(d: int) -> BellPolynomial:
    """Operator form of the d-outcome CGLMP expression, built from its probability form."""
    from .probability import probability_catalog

    if d < 3:
        raise ValueError("c22d needs d >= 3")
    expr = probability_catalog(f"cglmp:{d}")
    w = np.exp(2j * np.pi / d)
    # g[x, y, r]: weight on a~_x + b_y = r after relabelling a -> -a, a' -> -a' - 1
    g = np.zeros((2, 2, d))
    for t in expr.terms:
        (x, y), (sa, sb), r = t.choices, t.signs, t.residue
        r = r + sa * (1 if x == 1 else 0)
        sa = -sa
        if sa != sb:
            raise ValueError("cglmp condition does not couple a and b with opposite signs")
        if sa < 0:
            r = -r
        g[x, y, r % d] += t.weight
    ks = np.arange(d)
    ghat = np.einsum("xyr,kr->xyk", g, w ** (-np.outer(ks, ks))) / d
    terms = []
    for k in range(1, d // 2 + 1):
        f = 1.0 if 2 * k == d else 2.0
        terms.append(Term(f * ghat[:, :, k], (k, k)))
    offset = float(np.real(ghat[:, :, 0].sum()))
    return BellPolynomial(2, 2, d, tuple(terms), "hermitian", "roots", offset=offset,
                          name=f"c22d:{d}")


def c223_reim() -> BellPolynomial:
    """[ab + ab' + a'b - a'b']_H + 1/sqrt3 [-ab + ab' + a'b - a'b']_A as one hermitian-part tensor."""
    s = np.array([[1, 1], [1, -1]], dtype=complex)
    t = np.array([[-1, 1], [1, -1]], dtype=complex)
    # [T]_A = [-i T]_H
    return from_coefficients(2, 2, 3, s - 1j * t / np.sqrt(3), "hermitian", name="c223:reim")


CATALOG_NAMES = (
    "chsh", "mermin:n", "svetlichny3", "c223h", "c223", "c333", "c423", "c523",
    "c623", "c233", "c433ghz", "c433ame", "c22d:d",
)

VARIANTS = ("c433ame:raw", "c333:acin", "c223:reim", "c223:table1")


def catalog(name: str) -> BellPolynomial:
    key, _, arg = name.strip().lower().partition(":")
    if key == "chsh" and not arg:
        return from_coefficients(2, 2, 2, [[1, 1], [1, -1]], "full", name="chsh")
    if key == "mermin":
        try:
            return mermin(int(arg))
        except ValueError:
            raise UnknownNameError(f"mermin needs a party count, got {name!r}") from None
    if key == "svetlichny3" and not arg:
        return BellPolynomial(3, 2, 2, (Term(prime_count_tensor(3, [1, 1, -1, -1]), (1, 1, 1)),),
                              "full", "pm1", name="svetlichny3")
    if key == "c223h" and not arg:
        return _c223h()
    if key == "c223":
        if not arg:
            return _sym("c223", 2, [W, -1, W], "antihermitian")
        if arg == "reim":
            return c223_reim()
        if arg == "table1":
            return _sym("c223:table1", 2, [W, 1, W], "antihermitian")
    if key == "c333":
        if not arg:
            return _sym("c333", 3, [1, -W**2, W, 2], "hermitian")
        if arg == "acin":
            # probability form = 1 + 2/3 [C'333]_H after negating every outcome
            p = _sym("c333:acin", 3, [1, -W, W**2, 2], "hermitian")
            return replace(p, scale=2 / 3, offset=1.0)
    if key == "c423" and not arg:
        return _sym("c423", 4, [2, 1, W, 1, 2], "antihermitian")
    if key == "c523" and not arg:
        return _sym("c523", 5, [W**2, -W**2, -W**2, -W**2, W**2, W**2], "hermitian")
    if key == "c623" and not arg:
        return _sym("c623", 6, [-W, 1, -1, W, -1, 1, -W], "antihermitian")
    if key == "c233" and not arg:
        return from_coefficients(2, 3, 3, _c233_tensor(), "hermitian", name="c233")
    if key == "c433ghz" and not arg:
        # global sign fixed so that the bold bound is the hermitian maximum
        return from_coefficients(4, 3, 3, -_ghz433_tensor(), "hermitian", name="c433ghz")
    if key == "c433ame_raw" and not arg:
        key, arg = "c433ame", "raw"
    if key == "c433ame":
        if not arg:
            return from_coefficients(4, 3, 3, _ame433_tensor(True), "hermitian", name="c433ame")
        if arg == "raw":
            return from_coefficients(4, 3, 3, _ame433_tensor(False), "hermitian", name="c433ame:raw")
    if key == "c22d":
        try:
            d = int(arg)
        except ValueError:
            raise UnknownNameError(f"c22d needs an outcome count, got {name!r}") from None
        return c22d(d)
    raise UnknownNameError(f"unknown inequality {name!r}; known: {', '.join(CATALOG_NAMES)}")


def map_state_to_polynomial(amplitudes, d: int, part: Part = "hermitian", name: str = "") -> BellPolynomial:
    """Read a state's amplitude tensor as coefficients (index i_k of party k -> setting i_k).

    The normalization is removed by dividing by the smallest nonzero modulus;
    entries that are integer multiples of a d-th root of unity are snapped to it.
    """
    from .states import PureState

    if isinstance(amplitudes, PureState):
        t = amplitudes.tensor()
    else:
        t = np.asarray(amplitudes, dtype=complex)
    if t.ndim == 1:
        raise ValueError("pass the amplitude tensor with one axis per party")
    s = t.shape[0]
    if any(x != s for x in t.shape):
        raise ValueError("all parties need the same number of settings")
    mags = np.abs(t[np.abs(t) > 1e-12])
    if mags.size == 0:
        c = np.zeros_like(t)
    else:
        c = t / mags.min()
        c = _snap(c, d)
    return from_coefficients(t.ndim, s, d, c, part, name=name,
                             alphabet="pm1" if d == 2 else "roots")


def _snap(c: np.ndarray, d: int, tol: float = 1e-9) -> np.ndarray:
    roots = roots_of_unity(max(d, 2))
    out = np.round(c.real, 12) + 1j * np.round(c.imag, 12)
    for idx in np.ndindex(c.shape):
        z = c[idx]
        m = round(abs(z))
        if m == 0 or abs(abs(z) - m) > tol:
            continue
        k = int(round(np.angle(z) * len(roots) / (2 * np.pi))) % len(roots)
        cand = roots[k] if d > 2 else (1.0 if k == 0 else -1.0)
        if abs(m * cand - z) <= tol:
            out[idx] = m * cand
    return out


def symmetric_extension(p: BellPolynomial, groups=None) -> BellPolynomial:
    """Add a third party so that all terms with equal prime count share one coefficient.

    ``groups`` lists (target_prime_count, coefficient, (ja, jb)) triples splitting
    each two-party term; the third setting is primed exactly when the target count
    exceeds the term's own count. Explicit groups must add up to ``p``. Without
    groups every term is multiplied by (c + c').
    """
    if p.n != 2 or p.s != 2 or p.d != 3 or not p.is_linear or len(p.terms) != 1:
        raise ContractError("symmetric_extension needs a linear 2-party, 2-setting qutrit polynomial")
    c2 = p.coeffs
    explicit = groups is not None
    if not explicit:
        groups = [(sum(idx) + e, c2[idx], idx)
                  for idx in itertools.product(range(2), repeat=2) for e in (0, 1)]
    out = np.zeros((2, 2, 2), dtype=complex)
    filled = np.zeros((2, 2, 2), dtype=bool)
    total = np.zeros((2, 2), dtype=complex)
    for target, coef, idx in groups:
        idx = tuple(int(i) for i in idx)
        extra = int(target) - sum(idx)
        if extra not in (0, 1):
            raise ContractError(f"term {idx} cannot reach prime count {target} with one more party")
        k = idx + (extra,)
        if filled[k]:
            raise ContractError(f"term {k} assigned twice")
        out[k] = coef
        filled[k] = True
        total[idx] += coef
    if explicit and np.max(np.abs(total - c2)) > POLICY.exact:
        raise ContractError("groups do not add up to the input polynomial")
    if not filled.all():
        raise ContractError("some three-party terms are missing")
    for t in range(4):
        vals = [out[i] for i in itertools.product(range(2), repeat=3) if sum(i) == t]
        if max(abs(v - vals[0]) for v in vals) > POLICY.exact:
            raise ContractError(f"coefficients differ within prime-count class {t}")
    return BellPolynomial(3, 2, 3, (Term(out, (1, 1, 1)),), p.part, p.alphabet,
                          name=f"{p.name}+sym" if p.name else "")


def appendix_b_rewrite() -> tuple[BellPolynomial, list]:
    """The rewritten 2-qutrit CGLMP and its grouping into prime-count classes.

    The tensor is (w^2 - w) times the c223 coefficients in hermitian-part form
    with bound 3.
    """
    base = catalog("c223").coeffs
    p = from_coefficients(2, 2, 3, (W**2 - W) * base, "hermitian", name="c223:rewritten")
    groups = [
        (0, 1, (0, 0)),
        (1, -W**2, (0, 0)), (1, -W**2, (1, 0)), (1, -W**2, (0, 1)),
        (2, W, (1, 0)), (2, W, (0, 1)), (2, W, (1, 1)),
        (3, 2, (1, 1)),
    ]
    return p, groups


def _stack(ops, power: int, d: int) -> np.ndarray:
    if power == 0:
        return np.broadcast_to(np.eye(d, dtype=complex), (len(ops), d, d))
    return np.array([np.linalg.matrix_power(o, power) for o in ops])


def settings_matrices(settings) -> list[list[np.ndarray]]:
    """Normalize a SettingsAssignment or nested list of operators to nested matrices."""
    from .operators import SettingOperator

    parties = getattr(settings, "parties", settings)
    return [[o.matrix if isinstance(o, SettingOperator) else np.asarray(o, dtype=complex)
             for o in party] for party in parties]


def check_settings(p: BellPolynomial, settings) -> list[list[np.ndarray]]:
    from .operators import SettingOperator

    parties = getattr(settings, "parties", settings)
    if len(parties) != p.n:
        raise ValueError(f"{p.name or 'polynomial'} needs settings for {p.n} parties, got {len(parties)}")
    for k, party in enumerate(parties):
        if len(party) != p.s:
            raise ValueError(f"party {k} needs {p.s} settings, got {len(party)}")
        for o in party:
            m = o.matrix if isinstance(o, SettingOperator) else np.asarray(o)
            if m.shape != (p.d, p.d):
                raise ValueError(f"party {k} setting has shape {m.shape}, expected {(p.d, p.d)}")
            if isinstance(o, SettingOperator):
                if p.setting_flavor == "unitary_root" and o.flavor != "unitary_root":
                    raise ContractError(f"{p.name} needs unitary root-of-identity settings, got {o.label}")
                if p.setting_flavor == "hermitian" and np.max(np.abs(m - dagger(m))) > POLICY.hermitian_setting:
                    raise ContractError(f"{p.name} needs hermitian settings, got {o.label}")
    return settings_matrices(settings)


def select_part(b: np.ndarray, part: Part) -> np.ndarray:
    if part == "hermitian":
        return (b + dagger(b)) / 2
    if part == "antihermitian":
        return (b - dagger(b)) / 2j
    return b


def raw_operator(p: BellPolynomial, mats: list[list[np.ndarray]]) -> np.ndarray:
    """Sum of coefficient-weighted tensor products before part selection, scale and offset."""
    d, n = p.d, p.n
    check_dimension(d**n)
    total = np.zeros((d**n, d**n), dtype=complex)
    perm = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
    for term in p.terms:
        if not np.any(term.coeffs):
            continue
        t = term.coeffs
        for k in range(n):
            t = np.tensordot(t, _stack(mats[k], term.powers[k], d), axes=([0], [0]))
        total += t.transpose(perm).reshape(d**n, d**n)
    return total


def assemble(p: BellPolynomial, settings) -> np.ndarray:
    """Bell operator: part selection, then scale, then additive offset times identity."""
    mats = check_settings(p, settings)
    b = select_part(raw_operator(p, mats), p.part) * p.scale
    if p.offset:
        b = b + p.offset * np.eye(b.shape[0])
    return b


def polynomial_from_dict(data: dict) -> BellPolynomial:
    """Inverse of ``BellPolynomial.to_dict``; also accepts "coeffs" (single term) or "primes"."""
    n, s, d = int(data["n"]), int(data.get("s", 2)), int(data.get("d", 3))
    part = data.get("part", "hermitian")
    kw = dict(
        alphabet=data.get("alphabet", "pm1" if d == 2 else "roots"),
        scale=float(data.get("scale", 1.0)),
        offset=float(data.get("offset", 0.0)),
        name=data.get("name", ""),
        display_scale=float(data.get("display_scale", 1.0)),
        bold=data.get("bold"),
    )

    def sparse(entries):
        c = np.zeros((s,) * n, dtype=complex)
        for idx, val in entries:
            c[tuple(idx)] = from_json_array(val)
        return c

    if "primes" in data:
        vals = [complex(from_json_array(v)) for v in data["primes"]]
        terms = (Term(prime_count_tensor(n, vals, s), (1,) * n),)
    elif "terms" in data:
        terms = tuple(Term(sparse(t["coeffs"]), tuple(t.get("powers", (1,) * n))) for t in data["terms"])
    elif "coeffs" in data:
        terms = (Term(sparse(data["coeffs"]), (1,) * n),)
    else:
        raise ValueError("polynomial JSON needs 'coeffs', 'terms' or 'primes'")
    return BellPolynomial(n, s, d, terms, part, **kw)
