"""Setting operators: Weyl-Heisenberg, Gell-Mann, Fourier, MOS and parametrized roots of identity."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .linalg import dagger, hermiticity_defect
from .numeric import POLICY, ContractError, UnknownNameError

Flavor = Literal["unitary_root", "hermitian"]


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def _root_defect(m: np.ndarray, d: int) -> float:
    eye = np.eye(m.shape[0])
    unit = np.max(np.abs(m @ dagger(m) - eye))
    power = np.max(np.abs(np.linalg.matrix_power(m, d) - eye))
    return float(max(unit, power))


@dataclass(frozen=True)
class SettingOperator:
    """A d x d measurement setting, either a unitary with U^d = I or a hermitian observable."""

    matrix: np.ndarray = field(repr=False)
    flavor: Flavor
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"setting must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.flavor == "unitary_root":
            if _root_defect(m, self.d) > POLICY.unitary:
                raise ContractError(f"{self.label or 'setting'} is not a unitary d-th root of identity")
        elif self.flavor == "hermitian":
            if hermiticity_defect(m) > POLICY.hermitian_setting:
                raise ContractError(f"{self.label or 'setting'} is not hermitian")
        else:
            raise ValueError(f"unknown flavor {self.flavor!r}")

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def infer(cls, matrix: np.ndarray, label: str = "") -> "SettingOperator":
        """Pick ``unitary_root`` when U^d = I holds, else ``hermitian``."""
        m = np.asarray(matrix, dtype=complex)
        if m.ndim == 2 and m.shape[0] == m.shape[1] and _root_defect(m, m.shape[0]) <= POLICY.unitary:
            return cls(m, "unitary_root", label)
        if hermiticity_defect(m) <= POLICY.hermitian_setting:
            return cls(m, "hermitian", label)
        raise ContractError(f"{label or 'matrix'} is neither a unitary root of identity nor hermitian")


def weyl_heisenberg(d: int, k: int, j: int) -> SettingOperator:
    """X^k Z^j = sum_m |m+k><m| w^(j m)."""
    if d < 2:
        raise ValueError("weyl_heisenberg needs d >= 2")
    k %= d
    j %= d
    w = omega(d)
    m = np.zeros((d, d), dtype=complex)
    for col in range(d):
        m[(col + k) % d, col] = w ** (j * col)
    return SettingOperator(m, "unitary_root", _wh_label(k, j))


def _wh_label(k: int, j: int) -> str:
    if k == 0 and j == 0:
        return "I"
    parts = []
    if k:
        parts.append("X" if k == 1 else f"X{k}")
    if j:
        parts.append("Z" if j == 1 else f"Z{j}")
    return "".join(parts)


def shift(d: int) -> np.ndarray:
    return weyl_heisenberg(d, 1, 0).matrix


def clock(d: int) -> np.ndarray:
    return weyl_heisenberg(d, 0, 1).matrix


def generalized_gell_mann(d: int) -> np.ndarray:
    """Traceless hermitian basis of size d^2 - 1 with Tr(g_i g_j) = 2 delta_ij.

    Ordering reproduces the standard lambda_1..lambda_8 for d = 3.
    """
    if d < 2:
        raise ValueError("generalized_gell_mann needs d >= 2")
    out = []
    for k in range(1, d):
        for j in range(k):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1
            asym = np.zeros((d, d), dtype=complex)
            asym[j, k] = -1j
            asym[k, j] = 1j
            out += [sym, asym]
        diag = np.zeros(d)
        diag[:k] = 1
        diag[k] = -k
        out.append(np.diag(diag * np.sqrt(2 / (k * (k + 1)))).astype(complex))
    return np.array(out)


_GM3 = generalized_gell_mann(3)


def gell_mann(i: int) -> SettingOperator:
    if not 1 <= i <= 8:
        raise ValueError(f"Gell-Mann index {i} outside 1..8")
    return SettingOperator(_GM3[i - 1], "hermitian", f"gm{i}")


def fourier(d: int, normalized: bool = True) -> np.ndarray:
    """(F)_jk = w^(jk), divided by sqrt(d) when ``normalized``."""
    if d < 2:
        raise ValueError("fourier needs d >= 2")
    j = np.arange(d)
    f = omega(d) ** np.outer(j, j)
    return f / np.sqrt(d) if normalized else f


def default_mos_phase(d: int) -> float:
    # the signed shift cubes to (-1)^(d-1) I; even d needs a phase to close the orbit
    return 0.0 if d % 2 else np.pi / d


def mos(d: int, phi: float | None = None) -> SettingOperator:
    """Signed shift: X with every shift entry negated except the top-right one, times e^(i phi).

    ``phi`` must keep M^d = I; ``None`` picks the smallest valid phase.
    """
    if d < 2:
        raise ValueError("mos needs d >= 2")
    if phi is None:
        phi = default_mos_phase(d)
    m = -shift(d).astype(complex)
    m[0, d - 1] = 1
    m = np.exp(1j * phi) * m
    try:
        return SettingOperator(m, "unitary_root", f"mos:{phi:g}")
    except ContractError:
        raise ContractError(
            f"phase {phi:g} breaks M^{d} = I; valid phases are {default_mos_phase(d):g} + 2*pi*k/{d}"
        ) from None


def eigenbasis(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors (columns) of a normal matrix."""
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    if np.max(np.abs(m @ dagger(m) - dagger(m) @ m)) > 1e-8 * scale**2:
        raise ContractError("operator is not normal; eigenbasis ill-defined")
    t, q = scipy.linalg.schur(m, output="complex")
    return np.diag(t).copy(), q


def _groups(vals: np.ndarray, tol: float = 1e-8) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(vals):
        for g in groups:
            if abs(vals[g[0]] - v) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _block_unitary(groups, params, d):
    u = np.eye(d, dtype=complex)
    pos = 0
    for g in groups:
        m = len(g)
        if m == 1:
            continue
        gens = generalized_gell_mann(m)
        k = m * m - 1
        block = scipy.linalg.expm(1j * np.tensordot(params[pos:pos + k], gens, axes=1))
        u[np.ix_(g, g)] = block
        pos += k
    return u


def _matrix_of(op) -> np.ndarray:
    return op.matrix if isinstance(op, SettingOperator) else np.asarray(op, dtype=complex)


def is_mub(p, q, tol: float = POLICY.mub) -> tuple[bool, float]:
    """Whether the eigenbases of ``p`` and ``q`` are mutually unbiased, and the overlap defect.

    With degenerate spectra the defect is minimized over rotations inside each eigenspace.
    """
    a, b = _matrix_of(p), _matrix_of(q)
    if a.shape != b.shape:
        raise ValueError("operators differ in dimension")
    d = a.shape[0]
    va, ua = eigenbasis(a)
    vb, ub = eigenbasis(b)
    ga, gb = _groups(va), _groups(vb)

    def defect(x=None):
        if x is None:
            return float(np.max(np.abs(np.abs(dagger(ua) @ ub) ** 2 - 1 / d)))
        na = sum(len(g) ** 2 - 1 for g in ga if len(g) > 1)
        ra = ua @ _block_unitary(ga, x[:na], d)
        rb = ub @ _block_unitary(gb, x[na:], d)
        return float(np.max(np.abs(np.abs(dagger(ra) @ rb) ** 2 - 1 / d)))

    best = defect()
    npar = sum(len(g) ** 2 - 1 for g in ga + gb if len(g) > 1)
    if npar and best > tol:
        rng = np.random.default_rng(0)
        for start in range(8):
            x0 = np.zeros(npar) if start == 0 else rng.normal(size=npar)
            res = minimize(defect, x0, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
            best = min(best, float(res.fun))
            if best <= tol:
                break
    return best <= tol, best


def root_of_identity_unitary(d: int, params, outcome_phases=None) -> SettingOperator:
    """V D V^+ with V = exp(i sum params * g) over the generalized Gell-Mann basis.

    D holds the d-th roots of unity, ``w**outcome_phases[m]`` on row m.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (d * d - 1,):
        raise ValueError(f"need {d * d - 1} parameters for d={d}, got {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValueError("parameters must be finite")
    order = np.arange(d) if outcome_phases is None else np.asarray(outcome_phases)
    if sorted(order.tolist()) != list(range(d)):
        raise ValueError(f"outcome_phases must permute 0..{d - 1}")
    v = scipy.linalg.expm(1j * np.tensordot(params, generalized_gell_mann(d), axes=1))
    u = v @ np.diag(omega(d) ** order) @ dagger(v)
    return SettingOperator(u, "unitary_root", "param")


# Named operators for the CLI: "X", "Z", "XkZj:k,j", "mos:phi", "gm:i", "fourier".

def _parse_angle(text: str) -> float:
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?\d*\.?\d*)\*?pi(?:/(\d+(?:\.\d*)?))?", t)
    if m:
        coef = m.group(1)
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return c * np.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(t)


def named_matrix(name: str, d: int = 3) -> np.ndarray:
    """Matrix for a registry name, without flavor validation."""
    key, _, arg = name.strip().partition(":")
    low = key.lower()
    try:
        if key in ("X", "Z", "I") and not arg:
            return weyl_heisenberg(d, int(key == "X"), int(key == "Z")).matrix
        if low == "xkzj":
            k, j = (int(t) for t in arg.split(","))
            return weyl_heisenberg(d, k, j).matrix
        m = re.fullmatch(r"X(\d*)Z(\d*)", key)
        if m and not arg:
            return weyl_heisenberg(d, int(m.group(1) or 1), int(m.group(2) or 1)).matrix
        m = re.fullmatch(r"X(\d+)", key) or re.fullmatch(r"Z(\d+)", key)
        if m and not arg:
            p = int(m.group(1))
            return weyl_heisenberg(d, p if key[0] == "X" else 0, p if key[0] == "Z" else 0).matrix
        if low == "mos":
            return mos(d, _parse_angle(arg) if arg else None).matrix
        if low == "gm":
            if d != 3:
                raise ValueError("gm:i settings are qutrit operators")
            return gell_mann(int(arg)).matrix
        if low == "fourier":
            return fourier(d, normalized=True)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ContractError):
            raise
        raise UnknownNameError(f"cannot parse setting {name!r}: {exc}") from None
    raise UnknownNameError(f"unknown setting {name!r}")


def named_setting(name: str, d: int = 3) -> SettingOperator:
    return SettingOperator.infer(named_matrix(name, d), label=name.strip())
