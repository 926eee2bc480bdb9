"""Recompute the reference coefficient and bound tables cell by cell."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from importlib import metadata

import numpy as np
import scipy

from .classical import classical_report
from .linalg import nilpotency_defect, commutator
from .numeric import POLICY, UnknownNameError
from .operators import is_mub, mos, named_setting, root_of_identity_unitary
from .polynomial import W, assemble, catalog, prime_counts
from .quantum import SettingsAssignment, optimize_settings, quantum_value
from .states import reduction_purities

TABLES = ("table1", "table2", "table3", "appendixC")

TOL_EXACT = POLICY.exact
TOL_GIVEN = 1e-3
TOL_OPTIMIZED = 1e-2
TOL_PURITY = 0.01

R3 = np.sqrt(3)


@dataclass
class Cell:
    row: str
    column: str
    computed: float | str | None
    reference: float | str | None
    tolerance: float | None = None
    deviation: float | None = None
    passed: bool = False
    flagged: bool = False
    note: str = ""

    def __post_init__(self):
        if isinstance(self.reference, (int, float, np.floating)) and isinstance(self.computed, (int, float, np.floating)):
            self.computed = float(self.computed)
            self.reference = float(self.reference)
            self.deviation = abs(self.computed - self.reference)
            self.passed = self.deviation <= self.tolerance
        elif isinstance(self.reference, str):
            self.passed = self.computed == self.reference


@dataclass
class ReproductionDocument:
    table: str
    cells: list[Cell]
    metadata: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.passed and not c.flagged]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"table": self.table, "ok": self.ok, "metadata": self.metadata,
                "cells": [asdict(c) for c in self.cells]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["row", "column", "computed", "reference", "deviation", "tolerance", "passed", "flagged", "note"])
        for c in self.cells:
            out.writerow([c.row, c.column, _fmt(c.computed), _fmt(c.reference), _fmt(c.deviation),
                          _fmt(c.tolerance), int(c.passed), int(c.flagged), c.note])
        return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"bellforge": own, "numpy": np.__version__, "scipy": scipy.__version__}


def _mean_purity(state, size: int) -> tuple[float, str]:
    vals = reduction_purities(state).values(size)
    return float(np.mean(vals)), f"{size}-party purities {min(vals):.4f}..{max(vals):.4f}"


# the qutrit family of two-setting symmetric inequalities, by party count
FAMILY = {2: "c223", 3: "c333", 4: "c423", 5: "c523", 6: "c623"}

# table1: coefficients by number of primed settings

TABLE1 = {
    2: [W, 1, W],
    3: [1, -W**2, W, 2],
    4: [2, 1, W, 1, 2],
    5: [W**2, -W**2, -W**2, -W**2, W**2, W**2],
    6: [-W, 1, -1, W, -1, 1, -W],
}


def table1(**_) -> ReproductionDocument:
    cells = []
    for n, column in TABLE1.items():
        got = prime_counts(catalog(FAMILY[n]))
        for k, want in enumerate(column):
            dev = abs(got[k] - want)
            c = Cell(f"({k}')", str(n), _complex_str(got[k]), _complex_str(want), TOL_EXACT, float(dev),
                     bool(dev <= TOL_EXACT))
            if n == 2 and k == 1 and not c.passed:
                c.flagged = True
                c.note = "sign follows the explicit two-party form; table sign gives Amax 3*sqrt3/2, not sqrt3"
            cells.append(c)
    # which sign convention for n = 2 gives the sqrt3 bound
    for name, label in (("c223", "two-party form sign (1')=-1"), ("c223:table1", "table sign (1')=+1")):
        amax = classical_report(catalog(name)).Amax
        cells.append(Cell(f"Amax with {label}", "2", amax, R3, TOL_EXACT,
                          flagged=name == "c223:table1",
                          note="convention check" if name == "c223" else "does not reproduce sqrt3"))
    return ReproductionDocument("table1", cells, {"versions": _versions()})


def _complex_str(z) -> str:
    z = complex(z)
    return f"{z.real:+.6f}{z.imag:+.6f}j"


# table2

TABLE2_LR = {
    2: (R3, -2 * R3, 3, -3),
    3: (3 * R3, -3 * R3, 3, -6),
    4: (3 * R3, -6 * R3, 9, -9),
    5: (9 * R3, -9 * R3, 9, -18),
    6: (9 * R3, -18 * R3, 27, -27),
}
TABLE2_QM = {2: 2.524, 3: 5.058, 4: 9.766, 5: 15.575, 6: 32.817}
TABLE2_R = {2: 1.457, 3: 1.686, 4: 1.879, 5: 1.731, 6: 2.105}
TABLE2_SETTINGS = {2: "MOS", 3: "MUB", 4: "MUB", 5: "Num.", 6: "MOS"}
TABLE2_P = {2: 0.347, 3: 0.342, 4: 1 / 3, 5: 0.351, 6: 0.334}


def _lr_cells(report, col: str, reference: tuple[float, float, float, float]) -> list[Cell]:
    rows = (("<[B]_A>_LR", "Amax"), ("<[B]_A>_LR(-)", "Amin"), ("<[B]_H>_LR", "Hmax"), ("<[B]_H>_LR(-)", "Hmin"))
    cells = [Cell(r, col, report.values[k], v, TOL_EXACT) for (r, k), v in zip(rows, reference)]
    flags = report.pattern_flags()
    cells.append(Cell("bold min = -2 max", col, "yes" if flags["min_is_minus_two_max"] else "no", "yes"))
    return cells


def _settings_label(pair) -> str:
    a, b = (o.matrix for o in pair)
    mub, _ = is_mub(a, b)
    if mub:
        return "MUB"
    defect, _ = nilpotency_defect(commutator(a, b))
    return "MOS" if defect == 0 else "Num."


def table2(seed: int = 7, restarts: int = 3, budget: int = 3000, workers: int | None = None) -> ReproductionDocument:
    X, Z, M = named_setting("X"), named_setting("Z"), mos(3)
    given = {2: [X, M], 3: [X, Z], 4: [X, Z], 6: [X, M]}
    cells = []
    for n in range(2, 7):
        p = catalog(FAMILY[n])
        col = str(n)
        report = classical_report(p, workers=workers)
        cells += _lr_cells(report, col, TABLE2_LR[n])
        if n in given:
            settings = SettingsAssignment.uniform(given[n], n, "MOS" if given[n][1] is M else "MUB")
            tol = TOL_OPTIMIZED if n == 6 else TOL_GIVEN
            label = _settings_label(given[n])
            note = "given settings"
        else:
            opt = optimize_settings(p, restarts=restarts, budget=budget, seed=seed, workers=workers)
            settings = opt.settings
            tol = TOL_OPTIMIZED
            label = "Num."
            note = f"optimizer seed {seed}, {restarts} restarts, converged={opt.converged}"
        qm, state = quantum_value(p, settings)
        cells.append(Cell("<[B]_x>_QM", col, qm, TABLE2_QM[n], tol, note=note))
        if n == 5:
            cells.append(Cell("<[B]_x>_QM >= 15.5", col, "yes" if qm >= 15.5 else "no", "yes"))
        ratio = qm / report.bold_value
        cells.append(Cell("R", col, ratio, TABLE2_R[n], TOL_GIVEN if n != 5 and n != 6 else TOL_OPTIMIZED,
                          note="derived from QM and bold LR"))
        cells.append(Cell("Settings", col, label, TABLE2_SETTINGS[n]))
        pur, pnote = _mean_purity(state, n // 2)
        cells.append(Cell("P", col, pur, TABLE2_P[n], TOL_PURITY, note=pnote))
    meta = {"seed": seed, "restarts": restarts, "budget": budget, "versions": _versions()}
    return ReproductionDocument("table2", cells, meta)


# table3

TABLE3_LR = {
    "c233": (3 * R3, -3 * R3, 4.5, -4.5),
    "c433ghz": (9 * R3, -9 * R3, 13.5, -27),
    "c433ame": (9 * R3, -9 * R3, 13.5, -27),
}
TABLE3_QM = {"c233": 5.117, "c433ghz": 26.025, "c433ame": 25.372}
TABLE3_R = {"c233": 1.137, "c433ghz": 1.928, "c433ame": 1.879}
TABLE3_SETTINGS = {"c233": "MUB", "c433ghz": "Num.", "c433ame": "MUB and Num."}


def c433ame_settings(seed: int = 7, restarts: int = 3, budget: int = 3000, workers: int | None = None):
    """Printed optimal settings with party B's third setting optimized."""
    X, Z, Y = named_setting("X"), named_setting("Z"), named_setting("X2Z2")
    fixed = [[X, Y, Z], [X, X, None], [X, Y, Z], [X, Y, Z]]
    return optimize_settings(catalog("c433ame"), restarts=restarts, budget=budget, seed=seed,
                             fixed=fixed, workers=workers)


def table3(seed: int = 7, restarts: int = 3, budget: int = 3000, workers: int | None = None) -> ReproductionDocument:
    X, Z, Y = named_setting("X"), named_setting("Z"), named_setting("X2Z2")
    cells = []
    for name in ("c233", "c433ghz", "c433ame"):
        p = catalog(name)
        col = {"c233": "2", "c433ghz": "4 (GHZ)", "c433ame": "4 (AME)"}[name]
        report = classical_report(p, workers=workers)
        for c in _lr_cells(report, col, TABLE3_LR[name]):
            if c.row.startswith("<[B]_A>") and not c.passed:
                c.note = "anti-hermitian extrema of the stated polynomial differ from the table"
            cells.append(c)
        cells.pop()  # no -2 pattern claimed for these columns
        if name == "c233":
            settings = SettingsAssignment.uniform([X, Z, Y], 2, "MUB")
            label = "MUB" if all(is_mub(a.matrix, b.matrix)[0] for a, b in ((X, Z), (X, Y), (Z, Y))) else "Num."
            tol, note = TOL_GIVEN, "MUB triple X, Z, X^2Z^2"
        elif name == "c433ghz":
            opt = optimize_settings(p, restarts=restarts, budget=budget, seed=seed, workers=workers)
            settings, label = opt.settings, "Num."
            tol = TOL_OPTIMIZED
            note = f"optimizer seed {seed}, {restarts} restarts; a higher value than the table is a valid lower bound"
        else:
            opt = c433ame_settings(seed, restarts, budget, workers)
            settings, label = opt.settings, "MUB and Num."
            tol, note = TOL_OPTIMIZED, "printed settings, B'' optimized"
        qm, state = quantum_value(p, settings)
        cells.append(Cell("<[B]_H>_QM", col, qm, TABLE3_QM[name], tol, note=note))
        cells.append(Cell("R", col, qm / report.bold_value, TABLE3_R[name], TOL_GIVEN if name == "c233" else TOL_OPTIMIZED))
        cells.append(Cell("Settings", col, label, TABLE3_SETTINGS[name]))
        pur, pnote = _mean_purity(state, p.n // 2)
        cells.append(Cell("P", col, pur, 1 / 3, TOL_PURITY, note=pnote))
        if name == "c433ame":
            for k, want in enumerate((1 / 3, 1.0, 1 / 3, 1 / 3)):
                got = reduction_purities(state).values(1)[k]
                cells.append(Cell(f"P party {k}", col, got, want, TOL_PURITY))
    meta = {"seed": seed, "restarts": restarts, "budget": budget, "versions": _versions()}
    return ReproductionDocument("table3", cells, meta)


# two-party d-outcome family

def appendix_c(seed: int = 7, restarts: int = 3, budget: int = 3000, workers: int | None = None) -> ReproductionDocument:
    cells = []
    for d in (3, 4, 5):
        cells.append(Cell("classical max", f"c22d:{d}", classical_report(catalog(f"c22d:{d}")).Hmax, 2.0, TOL_EXACT))
    rng = np.random.default_rng(seed)
    worst = 0.0
    p, q = catalog("c22d:3"), catalog("c223:reim")
    for _ in range(20):
        ops = [[root_of_identity_unitary(3, rng.normal(size=8)) for _ in range(2)] for _ in range(2)]
        worst = max(worst, float(np.max(np.abs(assemble(p, ops) - assemble(q, ops)))))
    cells.append(Cell("operator equality with two-part form", "c22d:3", worst, 0.0, 1e-12,
                      note="max entry difference over 20 random unitary settings"))
    ratios = []
    for d in (3, 4, 5):
        opt = optimize_settings(catalog(f"c22d:{d}"), restarts=restarts, budget=budget, seed=seed, workers=workers)
        ratios.append(opt.value / 2.0)
        cells.append(Cell("optimized R", f"c22d:{d}", opt.value / 2.0, None,
                          note=f"optimizer seed {seed}, {restarts} restarts"))
        cells[-1].passed = True
    increasing = all(a < b for a, b in zip(ratios, ratios[1:]))
    cells.append(Cell("R increases with d", "c22d", "yes" if increasing else "no", "yes"))
    meta = {"seed": seed, "restarts": restarts, "budget": budget, "versions": _versions()}
    return ReproductionDocument("appendixC", cells, meta)


def reproduce(table: str, seed: int = 7, restarts: int = 3, budget: int = 3000,
              workers: int | None = None) -> ReproductionDocument:
    builders = {"table1": table1, "table2": table2, "table3": table3, "appendixC": appendix_c}
    key = {t.lower(): t for t in TABLES}.get(table.lower())
    if key is None:
        raise UnknownNameError(f"unknown table {table!r}; known: {', '.join(TABLES)}")
    return builders[key](seed=seed, restarts=restarts, budget=budget, workers=workers)
