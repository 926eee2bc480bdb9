"""Pure states: GHZ and quasi-GHZ families, AME(4,3), local transforms, reduction purities."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import dagger, from_json_array, is_unitary, purity, reduced_state
from .numeric import POLICY, ContractError, UnknownNameError


@dataclass(frozen=True)
class PureState:
    n: int
    d: int
    amplitudes: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.d**self.n:
            raise ValueError(f"{v.shape[0]} amplitudes for {self.n} parties of dimension {self.d}")
        if abs(np.linalg.norm(v) - 1) > POLICY.state_norm:
            raise ContractError(f"state norm {np.linalg.norm(v):.15f} differs from 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, n: int, d: int, amplitudes, label: str = "") -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ContractError("zero vector is not a state")
        return cls(n, d, v / norm, label)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "label": self.label,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


def _branch_index(k: int, n: int, d: int) -> int:
    return sum(k * d**p for p in range(n))


def ghz(n: int, d: int) -> PureState:
    if n < 1 or d < 2:
        raise ValueError("ghz needs n >= 1 and d >= 2")
    v = np.zeros(d**n, dtype=complex)
    for k in range(d):
        v[_branch_index(k, n, d)] = 1
    return PureState(n, d, v / np.sqrt(d), f"ghz:{n},{d}")


def quasi_ghz(n: int, gamma: float, d: int = 3) -> PureState:
    """(|0..0> + gamma |1..1> + |2..2>) / sqrt(2 + gamma^2)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if d != 3:
        raise ValueError("quasi_ghz is defined for qutrits")
    v = np.zeros(3**n, dtype=complex)
    for k, a in enumerate((1.0, gamma, 1.0)):
        v[_branch_index(k, n, 3)] = a
    return PureState(n, 3, v / np.sqrt(2 + gamma**2), f"quasi:{n},{gamma:g}")


def ame43() -> PureState:
    w = np.exp(2j * np.pi / 3)
    t = np.zeros((3,) * 4, dtype=complex)
    for i, j, k, l in itertools.product(range(3), repeat=4):
        t[i, j, k, l] = w ** (j * (i - k) + l * (i + k))
    return PureState(4, 3, t.reshape(-1) / 9, "ame43")


def apply_local(unitaries, psi: PureState) -> PureState:
    """(U_1 x ... x U_n)|psi>, applied mode by mode."""
    if len(unitaries) != psi.n:
        raise ValueError(f"need {psi.n} local operators, got {len(unitaries)}")
    t = psi.tensor()
    for k, u in enumerate(unitaries):
        u = np.asarray(u, dtype=complex)
        if u.shape != (psi.d, psi.d):
            raise ValueError(f"factor {k} has shape {u.shape}")
        if not is_unitary(u):
            raise ContractError(f"factor {k} is not unitary")
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
    return PureState.normalized(psi.n, psi.d, t, psi.label)


@dataclass(frozen=True)
class PurityReport:
    by_size: dict[int, list[tuple[tuple[int, ...], float]]]

    def summary(self) -> dict[int, tuple[float, float]]:
        return {s: (min(p for _, p in v), max(p for _, p in v)) for s, v in self.by_size.items()}

    def values(self, size: int) -> list[float]:
        return [p for _, p in self.by_size[size]]

    def to_dict(self) -> dict:
        return {
            str(s): [{"subset": list(sub), "purity": p} for sub, p in v]
            for s, v in self.by_size.items()
        }


def reduction_purities(psi: PureState) -> PurityReport:
    out = {}
    for size in range(1, psi.n // 2 + 1):
        out[size] = [
            (sub, purity(reduced_state(psi.amplitudes, sub, psi.n, psi.d)))
            for sub in itertools.combinations(range(psi.n), size)
        ]
    return PurityReport(out)


def _closest_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def ghz_frame(psi: PureState, seed: int = 0) -> tuple[list[np.ndarray], np.ndarray, float]:
    """Local frames in which ``psi`` is GHZ-diagonal, sum_k c_k |k...k>.

    Returns (frames, c, residual). Frames are unitaries whose columns are the
    local branch vectors; c is real non-negative with the odd-one-out branch
    moved to the middle (for d = 3). ``residual`` is the norm of the part of
    ``psi`` not captured by the diagonal form.
    """
    n, d = psi.n, psi.d
    if n < 2:
        raise ValueError("ghz_frame needs at least two parties")
    t = psi.tensor()
    if n == 2:
        u, s, vh = np.linalg.svd(t)
        factors = [u, vh.T]
    else:
        rng = np.random.default_rng(seed)
        flat = t.reshape(d, d, -1)
        x, y = rng.normal(size=(2, flat.shape[2])) + 1j * rng.normal(size=(2, flat.shape[2]))
        mx, my = flat @ x, flat @ y
        _, a = np.linalg.eig(mx @ np.linalg.pinv(my))
        a = a / np.linalg.norm(a, axis=0)
        dual = np.linalg.pinv(a)
        factors = [a] + [np.zeros((d, d), dtype=complex) for _ in range(n - 1)]
        for k in range(d):
            rest = np.tensordot(dual[k], t, axes=([0], [0]))
            for p in range(1, n):
                m = rest.reshape(d, -1)
                u, _, vh = np.linalg.svd(m, full_matrices=False)
                factors[p][:, k] = u[:, 0]
                if p < n - 1:
                    rest = (dagger(u[:, :1]) @ m).reshape((d,) * (n - 1 - p))
    frames = [_closest_unitary(f) for f in factors]
    coef = np.array([_branch_amplitude(t, frames, k) for k in range(d)])
    order = list(range(d))
    if d == 3:
        mags = np.abs(coef)
        odd = max(range(3), key=lambda k: min(abs(mags[k] - mags[j]) for j in range(3) if j != k))
        others = [k for k in range(3) if k != odd]
        order = [others[0], odd, others[1]]
    frames = [f[:, order] for f in frames]
    coef = coef[order]
    frames[0] = frames[0] * np.exp(1j * np.angle(coef))[None, :]
    coef = np.abs(coef)
    recon = np.zeros_like(t)
    for k in range(d):
        vec = frames[0][:, k]
        for p in range(1, n):
            vec = np.multiply.outer(vec, frames[p][:, k])
        recon = recon + coef[k] * vec
    return frames, coef, float(np.linalg.norm(recon - t))


def _branch_amplitude(t, frames, k):
    v = t
    for f in frames:
        v = np.tensordot(np.conj(f[:, k]), v, axes=([0], [0]))
    return complex(v)


def framed_quasi_ghz(frames, gamma: float) -> PureState:
    base = quasi_ghz(len(frames), gamma)
    return apply_local(frames, base)


def parse_state(spec: str) -> PureState:
    """Registry: "ghz:n,d", "quasi:n,gamma", "ame43", "bell+[:d]", or a JSON file path."""
    text = spec.strip()
    key, _, arg = text.partition(":")
    try:
        if key == "ghz":
            n, d = (int(x) for x in arg.split(","))
            return ghz(n, d)
        if key == "quasi":
            n, g = arg.split(",")
            return quasi_ghz(int(n), float(g))
        if key == "ame43" and not arg:
            return ame43()
        if key == "bell+":
            s = ghz(2, int(arg) if arg else 2)
            return PureState(2, s.d, s.amplitudes, text)
    except ValueError as exc:
        raise UnknownNameError(f"cannot parse state {spec!r}: {exc}") from None
    path = Path(text.lstrip("@"))
    if path.suffix == ".json" and path.exists():
        return state_from_json(json.loads(path.read_text()))
    raise UnknownNameError(f"unknown state {spec!r}")


def state_from_json(data) -> PureState:
    """Accepts {"n", "d", "amplitudes": [[re, im], ...]} or a bare amplitude list."""
    if isinstance(data, dict):
        v = from_json_array(data["amplitudes"]).reshape(-1)
        n, d = int(data["n"]), int(data["d"])
        label = data.get("label", "json")
    else:
        v = from_json_array(data).reshape(-1)
        n, d = _guess_shape(v.size)
        label = "json"
    return PureState.normalized(n, d, v, label)


def _guess_shape(size: int) -> tuple[int, int]:
    for d in (3, 2):
        n = round(np.log(size) / np.log(d))
        if d**n == size:
            return n, d
    raise ValueError(f"{size} amplitudes is not a power of 2 or 3")
