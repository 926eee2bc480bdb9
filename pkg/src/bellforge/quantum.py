"""Quantum values: eigenvalue certification at fixed settings and heuristic settings optimization.

A value computed at given settings is exact (largest eigenvalue of the Bell
operator). Optimizing over settings only gives a lower bound on the quantum
maximum; reports say which of the two was done.
"""

from __future__ import annotations

import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize, minimize_scalar

from .classical import ClassicalReport, classical_report, outcome_values
from .linalg import dagger, max_eigenpair
from .numeric import ENUMERATION_GUARD, POLICY, max_workers
from .operators import SettingOperator, generalized_gell_mann, named_setting
from .polynomial import BellPolynomial, assemble, check_settings, select_part
from .states import PureState, PurityReport, framed_quasi_ghz, ghz_frame, quasi_ghz, reduction_purities


@dataclass(frozen=True)
class SettingsAssignment:
    parties: tuple[tuple[SettingOperator, ...], ...]
    label: str = "custom"

    def __post_init__(self):
        parties = tuple(tuple(p) for p in self.parties)
        object.__setattr__(self, "parties", parties)
        dims = {o.d for p in parties for o in p}
        if len(dims) > 1:
            raise ValueError(f"settings mix dimensions {sorted(dims)}")

    @property
    def d(self) -> int:
        return self.parties[0][0].d

    @classmethod
    def uniform(cls, ops, n: int, label: str = "custom") -> "SettingsAssignment":
        return cls(tuple(tuple(ops) for _ in range(n)), label)

    @classmethod
    def from_matrices(cls, mats, label: str = "custom") -> "SettingsAssignment":
        return cls(tuple(tuple(SettingOperator.infer(m) for m in party) for party in mats), label)

    @classmethod
    def parse(cls, text: str, n: int, d: int = 3, label: str | None = None) -> "SettingsAssignment":
        """"X,Z" gives every party (X, Z); "X,Z;X,mos" lists parties separated by ';'."""
        groups = [g for g in text.split(";") if g.strip()]
        rows = [tuple(named_setting(t, d) for t in _split_names(g)) for g in groups]
        if len(rows) == 1:
            rows = rows * n
        if len(rows) != n:
            raise ValueError(f"settings list {len(rows)} parties, polynomial has {n}")
        return cls(tuple(rows), label or text)

    def matrices(self) -> list[list[np.ndarray]]:
        return [[o.matrix for o in p] for p in self.parties]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "parties": [
                [{"label": o.label, "flavor": o.flavor,
                  "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in o.matrix]}
                 for o in p]
                for p in self.parties
            ],
        }


def _split_names(group: str) -> list[str]:
    # commas inside "XkZj:k,j" belong to the argument
    out, buf = [], ""
    for tok in group.split(","):
        if buf and buf.lower().startswith("xkzj:") and buf.count(",") == 0:
            buf += "," + tok
            out.append(buf.strip())
            buf = ""
            continue
        if buf:
            out.append(buf.strip())
        buf = tok
    if buf:
        out.append(buf.strip())
    return [t for t in out if t]


def quantum_value(p: BellPolynomial, settings) -> tuple[float, PureState]:
    lam, vec = max_eigenpair(assemble(p, settings))
    return lam, PureState.normalized(p.n, p.d, vec, f"top eigenvector of {p.name}")


def expectation(p: BellPolynomial, settings, psi: PureState) -> float:
    b = assemble(p, settings)
    if b.shape[0] != psi.amplitudes.shape[0]:
        raise ValueError("state and operator dimensions differ")
    val = np.vdot(psi.amplitudes, b @ psi.amplitudes)
    if abs(val.imag) > POLICY.hermitian * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not hermitian")
    return float(val.real)


def gamma_sweep(p: BellPolynomial, settings, n: int | None = None, resolution: int = 400,
                frame=None, gamma_range: tuple[float, float] = (0.05, 4.0)) -> tuple[float, float]:
    """Best quasi-GHZ weight gamma: grid search, then golden-section refinement.

    ``frame`` None uses the computational basis, "auto" takes the local frames of
    the operator's top eigenvector, or pass one unitary per party.
    """
    n = p.n if n is None else n
    if p.d != 3:
        raise ValueError("gamma_sweep is defined for qutrits")
    b = assemble(p, settings)
    if isinstance(frame, str) and frame == "auto":
        _, top = max_eigenpair(b)
        frame, _, _ = ghz_frame(PureState.normalized(n, 3, top))

    def value(g):
        psi = quasi_ghz(n, g) if frame is None else framed_quasi_ghz(frame, g)
        return float(np.vdot(psi.amplitudes, b @ psi.amplitudes).real)

    grid = np.geomspace(*gamma_range, resolution)
    vals = np.array([value(g) for g in grid])
    i = int(np.argmax(vals))
    if i in (0, len(grid) - 1):
        # optimum on the edge of the range; no bracket to refine
        return float(grid[i]), float(vals[i])
    res = minimize_scalar(lambda g: -value(g), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                          method="golden", tol=1e-10)
    g = float(res.x)
    return g, value(g)


# settings optimization

class _Model:
    """Parametrized settings U = V D V^+, V = exp(i sum x g), and the value/gradient of the top eigenvalue."""

    def __init__(self, p: BellPolynomial, fixed=None):
        self.p = p
        self.d = p.d
        self.gens = generalized_gell_mann(p.d)
        self.m = self.gens.shape[0]
        self.diag = np.diag(outcome_values(p))
        self.fixed = fixed or [[None] * p.s for _ in range(p.n)]
        self.slots = [(k, j) for k in range(p.n) for j in range(p.s) if self.fixed[k][j] is None]
        self.size = len(self.slots) * self.m
        self.phase = -1j if p.part == "antihermitian" else 1.0

    def setting(self, x):
        a = 1j * np.tensordot(x, self.gens, axes=1)
        v = scipy.linalg.expm(a)
        return v @ self.diag @ dagger(v), a, v

    def settings(self, x):
        xs = x.reshape(len(self.slots), self.m)
        mats = [[None if f is None else np.asarray(getattr(f, "matrix", f), dtype=complex) for f in row]
                for row in self.fixed]
        for (k, j), xi in zip(self.slots, xs):
            mats[k][j] = self.setting(xi)[0]
        return mats

    def operator(self, mats):
        from .polynomial import raw_operator

        return select_part(raw_operator(self.p, mats), self.p.part) * self.p.scale

    def value(self, x) -> float:
        return float(np.linalg.eigvalsh(self.operator(self.settings(x)))[-1])

    def _environment(self, mats, vec, k):
        p = self.p
        n = p.n
        letters = iter(string.ascii_letters)
        jl = [next(letters) for _ in range(n)]
        rl = [next(letters) for _ in range(n)]
        cl = [next(letters) for _ in range(n)]
        ops = [np.asarray(p.coeffs)]
        subs = ["".join(jl)]
        for q in range(n):
            if q == k:
                continue
            ops.append(np.array(mats[q]))
            subs.append(jl[q] + rl[q] + cl[q])
        t = vec.reshape((self.d,) * n)
        ops += [t.conj(), t]
        subs += ["".join(rl), "".join(cl)]
        return np.einsum(",".join(subs) + "->" + jl[k] + rl[k] + cl[k], *ops, optimize=True)

    def _setting_gradient(self, xi, env):
        """Value and gradient of Re(phase * sum(U(xi) * env)) * scale."""
        u, a, v = self.setting(xi)
        vd = dagger(v)
        grad = np.empty(self.m)
        for g in range(self.m):
            dv = scipy.linalg.expm_frechet(a, 1j * self.gens[g], compute_expm=False)
            du = dv @ self.diag @ vd + v @ self.diag @ dagger(dv)
            grad[g] = (self.phase * np.sum(du * env)).real * self.p.scale
        return float((self.phase * np.sum(u * env)).real * self.p.scale), grad

    def seesaw(self, x, sweeps: int = 50, tol: float = 1e-11):
        """Alternate top-eigenvector and single-setting updates; the top eigenvalue never decreases."""
        xs = x.reshape(len(self.slots), self.m).copy()
        last = -np.inf
        for _ in range(sweeps):
            mats = self.settings(xs.reshape(-1))
            vals, vecs = np.linalg.eigh(self.operator(mats))
            if vals[-1] - last <= tol:
                break
            last = vals[-1]
            top = vecs[:, -1]
            for i, (k, j) in enumerate(self.slots):
                env = self._environment(mats, top, k)[j]
                res = minimize(lambda y: tuple(-t for t in self._setting_gradient(y, env)), xs[i], jac=True,
                               method="L-BFGS-B", options={"gtol": 1e-12, "ftol": 1e-15})
                if -res.fun > self._setting_gradient(xs[i], env)[0]:
                    xs[i] = res.x
                    mats[k][j] = self.setting(res.x)[0]
        return float(np.linalg.eigvalsh(self.operator(self.settings(xs.reshape(-1))))[-1]), xs.reshape(-1)

    def value_and_grad(self, x):
        xs = x.reshape(len(self.slots), self.m)
        mats = [[None if f is None else np.asarray(getattr(f, "matrix", f), dtype=complex) for f in row]
                for row in self.fixed]
        parts = {}
        for (k, j), xi in zip(self.slots, xs):
            u, a, v = self.setting(xi)
            mats[k][j] = u
            parts[(k, j)] = (a, v)
        vals, vecs = np.linalg.eigh(self.operator(mats))
        top = vecs[:, -1]
        grad = np.zeros((len(self.slots), self.m))
        envs = {}
        for i, (k, j) in enumerate(self.slots):
            if k not in envs:
                envs[k] = self._environment(mats, top, k)
            a, v = parts[(k, j)]
            vd = dagger(v)
            for g in range(self.m):
                dv = scipy.linalg.expm_frechet(a, 1j * self.gens[g], compute_expm=False)
                du = dv @ self.diag @ vd + v @ self.diag @ dagger(dv)
                grad[i, g] = (self.phase * np.sum(du * envs[k][j])).real * self.p.scale
        return float(vals[-1]), grad.reshape(-1)


@dataclass
class OptimizationResult:
    settings: SettingsAssignment
    value: float
    converged: bool
    evaluations: int
    seed: int
    restart_values: list[float] = field(default_factory=list)
    method: str = "lbfgs"

    def to_dict(self) -> dict:
        return {"value": self.value, "converged": self.converged, "evaluations": self.evaluations,
                "seed": self.seed, "method": self.method, "restart_values": self.restart_values,
                "settings": self.settings.to_dict()}


def _pattern_search(f, x0, budget, step=0.5, tol=1e-7):
    x, fx, evals = x0.copy(), f(x0), 1
    while step > tol:
        improved = False
        for i in range(len(x)):
            for sg in (1.0, -1.0):
                if evals >= budget:
                    return x, fx, evals, False
                y = x.copy()
                y[i] += sg * step
                fy = f(y)
                evals += 1
                if fy > fx + 1e-13:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            step /= 2
    return x, fx, evals, True


def _run_restart(model: _Model, rng: np.random.Generator, method: str, budget: int, refine: bool = False):
    fx, x, evals, ok = _local_search(model, rng.normal(size=model.size), method, budget)
    if refine:
        fr, xr = model.seesaw(x)
        if fr > fx:
            fx, x = fr, xr
    return fx, x, evals, ok


def _local_search(model: _Model, x0, method: str, budget: int):
    if method == "pattern":
        x, fx, evals, ok = _pattern_search(model.value, x0, budget)
        return fx, x, evals, ok
    if model.p.is_linear and len(model.p.terms) == 1:
        fun = lambda x: tuple(-t for t in model.value_and_grad(x))  # noqa: E731
        jac = True
    else:
        fun = lambda x: -model.value(x)  # noqa: E731
        jac = None
    res = minimize(fun, x0, jac=jac, method="L-BFGS-B",
                   options={"maxiter": budget, "maxfun": budget, "gtol": 1e-10, "ftol": 1e-15})
    return -float(res.fun), res.x, int(res.nfev), bool(res.success)


def optimize_settings(p: BellPolynomial, d: int | None = None, restarts: int = 20, budget: int = 3000,
                      seed: int = 0, method: str = "lbfgs", fixed=None,
                      workers: int | None = None, refine: bool = False) -> OptimizationResult:
    """Best settings found over seeded restarts; the value is a lower bound on the quantum maximum.

    ``method`` is "lbfgs" (exact eigenvalue gradients for linear polynomials,
    finite differences otherwise) or "pattern" (derivative-free coordinate search).
    ``fixed`` holds per-party lists where None marks the settings to optimize.
    ``budget`` caps function evaluations per restart. ``refine`` adds a see-saw
    stage (linear single-term polynomials only) after each local search.
    """
    if d is not None and d != p.d:
        raise ValueError(f"polynomial has d={p.d}, asked for d={d}")
    if method not in ("lbfgs", "pattern"):
        raise ValueError(f"unknown method {method!r}")
    if restarts < 1:
        raise ValueError("need at least one restart")
    if refine and not (p.is_linear and len(p.terms) == 1):
        raise ValueError("see-saw refinement needs a linear single-term polynomial")
    model = _Model(p, fixed)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]

    def job(rng):
        return _run_restart(model, rng, method, budget, refine)

    nw = min(max_workers(workers), restarts)
    if nw > 1:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            runs = list(ex.map(job, rngs))
    else:
        runs = [job(r) for r in rngs]
    # deterministic merge: highest value, earliest restart on ties
    best = max(range(restarts), key=lambda i: (runs[i][0], -i))
    _, x, _, ok = runs[best]
    mats = model.settings(x)
    assignment = SettingsAssignment(
        tuple(tuple(o if isinstance(o, SettingOperator) else SettingOperator(m, p.setting_flavor, "num")
                    for o, m in zip(frow, mrow))
              for frow, mrow in zip(model.fixed, mats)),
        "Num",
    )
    value, _ = quantum_value(p, assignment)
    return OptimizationResult(assignment, value, ok, sum(r[2] for r in runs), seed,
                              [float(r[0]) for r in runs], method)


@dataclass
class BoundReport:
    name: str
    classical: ClassicalReport
    quantum_value: float
    ratio: float
    optimal_state: PureState
    purity: PurityReport
    settings: SettingsAssignment
    method: str
    display_scale: float = 1.0
    optimization: OptimizationResult | None = None

    @property
    def is_bell_inequality(self) -> bool:
        return self.ratio > 1

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "method": self.method,
            "display_scale": self.display_scale,
            "classical": self.classical.to_dict(),
            "quantum_value": self.quantum_value * self.display_scale,
            "ratio": self.ratio,
            "settings_label": self.settings.label,
            "purity": self.purity.to_dict(),
            "optimal_state": self.optimal_state.to_dict(),
            "settings": self.settings.to_dict(),
        }
        if self.optimization is not None:
            out["optimization"] = {k: v for k, v in self.optimization.to_dict().items() if k != "settings"}
        return out


def bound_report(p: BellPolynomial, settings=None, restarts: int = 20, budget: int = 3000, seed: int = 0,
                 method: str = "lbfgs", guard: int = ENUMERATION_GUARD,
                 workers: int | None = None, refine: bool = False) -> BoundReport:
    """Classical bounds, quantum value, ratio against the bold classical bound, and optimal-state purities.

    With ``settings`` None the settings are optimized (lower bound), otherwise the
    value is the exact top eigenvalue at the given settings.
    """
    classical = classical_report(p, guard=guard, workers=workers)
    opt = None
    if settings is None:
        opt = optimize_settings(p, restarts=restarts, budget=budget, seed=seed, method=method, workers=workers,
                                refine=refine)
        settings = opt.settings
        how = "optimized"
    else:
        if not isinstance(settings, SettingsAssignment):
            settings = SettingsAssignment.from_matrices(check_settings(p, settings))
        how = "eigen"
    value, state = quantum_value(p, settings)
    denom = classical.bold_value
    ratio = value / denom if denom > 0 else float("nan")
    return BoundReport(p.name, classical, value, ratio, state, reduction_purities(state), settings, how,
                       p.display_scale, opt)
