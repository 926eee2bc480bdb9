"""Command line entry point: ``bellforge <command> ...``.

Exit codes: 0 success, 1 a reproduced cell failed, 2 usage or unknown name,
3 capacity limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .classical import classical_report
from .numeric import ENUMERATION_GUARD, BellforgeError, CapacityError, ContractError, UnknownNameError
from .polynomial import CATALOG_NAMES, VARIANTS, BellPolynomial, catalog, polynomial_from_dict
from .probability import (acin_bases, bases_from_settings, cglmp_bases, evaluate_expression,
                          expression_from_dict, probability_catalog)
from .quantum import SettingsAssignment, bound_report, expectation, gamma_sweep
from .reproduce import TABLES, reproduce
from .states import parse_state


def closed_form(x: float, tol: float = 1e-9) -> str:
    """Short exact-looking form for values like 3*sqrt3 or 9/2, else the decimal."""
    for root, suffix in ((1.0, ""), (np.sqrt(3), "*sqrt3"), (np.sqrt(2), "*sqrt2")):
        f = Fraction(x / root).limit_denominator(12)
        if abs(float(f) * root - x) <= tol:
            if suffix and f == 0:
                continue
            num = str(f) if suffix == "" or f not in (1, -1) else ("-" if f < 0 else "")
            return f"{num}{suffix.lstrip('*') if num in ('', '-') else suffix}"
    return f"{x:.6f}"


def purity_text(report) -> str:
    return ", ".join(f"{k}-party {lo:.4f}" + ("" if abs(hi - lo) < 5e-5 else f"..{hi:.4f}")
                     for k, (lo, hi) in sorted(report.summary().items()))


def load_polynomial(spec: str) -> BellPolynomial:
    if spec.startswith("@"):
        return polynomial_from_dict(json.loads(Path(spec[1:]).read_text()))
    return catalog(spec)


def load_expression(spec: str):
    if spec.startswith("@"):
        return expression_from_dict(json.loads(Path(spec[1:]).read_text()))
    return probability_catalog(spec)


def _emit(args, payload: dict, text: str) -> None:
    out = json.dumps(payload, indent=2, sort_keys=True) if args.json else text
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)


def cmd_catalog(args) -> int:
    rows = []
    for name in CATALOG_NAMES:
        example = name.replace(":n", ":3").replace(":d", ":3")
        p = catalog(example)
        rows.append({"name": name, "example": example, "n": p.n, "s": p.s, "d": p.d,
                     "part": p.part, "bold": p.bold})
    text = "\n".join(f"{r['name']:<12} n={r['n']} s={r['s']} d={r['d']} part={r['part']:<13} bold={r['bold']}"
                     for r in rows)
    text += f"\n{len(rows)} inequalities; variants: {', '.join(VARIANTS)}"
    _emit(args, {"inequalities": rows, "variants": list(VARIANTS)}, text)
    return 0


def cmd_classical(args) -> int:
    p = load_polynomial(args.ineq)
    rep = classical_report(p, guard=args.guard)
    lines = [f"{p.name}: {rep.count} deterministic strategies, bold bound {rep.bold}"]
    for k in ("Amax", "Amin", "Hmax", "Hmin"):
        v = rep.values[k] * rep.display_scale
        lines.append(f"  {k} = {closed_form(v)} = {v:.6f}  witness {rep.witnesses[k].to_list()}")
    lines.append(f"  patterns {rep.pattern_flags()}")
    _emit(args, rep.to_dict(), "\n".join(lines))
    return 0


def cmd_quantum(args) -> int:
    p = load_polynomial(args.ineq)
    settings = SettingsAssignment.parse(args.settings, p.n, p.d)
    rep = bound_report(p, settings, guard=args.guard)
    payload = rep.to_dict()
    lines = [f"{p.name} at settings {args.settings}:",
             f"  quantum value {rep.quantum_value * rep.display_scale:.9f} (top eigenvalue)",
             f"  classical bold {rep.classical.bold} = {rep.classical.bold_value * rep.display_scale:.6f}",
             f"  R = {rep.ratio:.6f}",
             f"  purities {purity_text(rep.purity)}"]
    if args.state:
        psi = parse_state(args.state)
        val = expectation(p, settings, psi)
        payload["expectation"] = {"state": args.state, "value": val * p.display_scale}
        lines.append(f"  <{args.state}|B|{args.state}> = {val * p.display_scale:.9f}")
    if args.sweep:
        g, val = gamma_sweep(p, settings, frame="auto")
        payload["gamma_sweep"] = {"gamma": g, "value": val * p.display_scale}
        lines.append(f"  quasi-GHZ sweep: gamma* = {g:.6f}, value {val * p.display_scale:.9f}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_optimize(args) -> int:
    p = load_polynomial(args.ineq)
    rep = bound_report(p, None, restarts=args.restarts, budget=args.budget, seed=args.seed,
                       method=args.method, guard=args.guard, refine=args.refine)
    opt = rep.optimization
    lines = [f"{p.name}: optimized over settings (lower bound on the quantum maximum)",
             f"  value {rep.quantum_value * rep.display_scale:.9f}, R = {rep.ratio:.6f}",
             f"  seed {opt.seed}, restarts {len(opt.restart_values)}, evaluations {opt.evaluations}, "
             f"converged {opt.converged}",
             f"  purities {purity_text(rep.purity)}"]
    _emit(args, rep.to_dict(), "\n".join(lines))
    return 0


def cmd_prob(args) -> int:
    expr = load_expression(args.expr)
    psi = parse_state(args.state)
    if args.settings:
        settings = SettingsAssignment.parse(args.settings, expr.n, expr.d)
        bases = bases_from_settings(settings, args.alphabet)
        how = f"eigenbases of {args.settings}"
    elif expr.name.startswith("cglmp"):
        bases, how = cglmp_bases(expr.d), "phase-then-Fourier bases"
    elif expr.name.startswith("acin333"):
        bases, how = acin_bases(), "Gell-Mann eigenbases in the optimal-state frame"
    else:
        raise ValueError("pass --settings to choose measurement bases")
    val = evaluate_expression(expr, psi, bases)
    payload = {"expression": expr.name, "state": args.state, "bases": how, "value": val, "bound": expr.bound}
    _emit(args, payload, f"{expr.name} on {args.state} ({how}): {val:.9f} (classical bound {expr.bound:g})")
    return 0


def cmd_reproduce(args) -> int:
    doc = reproduce(args.table, seed=args.seed, restarts=args.restarts, budget=args.budget)
    if args.csv:
        text = doc.to_csv()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    elif args.json:
        _emit(args, doc.to_dict(), "")
    else:
        lines = [f"{doc.table}: {'all cells pass' if doc.ok else f'{len(doc.failures)} cell(s) fail'}"]
        for c in doc.cells:
            status = "PASS" if c.passed else ("FLAG" if c.flagged else "FAIL")
            comp = f"{c.computed:.6g}" if isinstance(c.computed, float) else c.computed
            ref = f"{c.reference:.6g}" if isinstance(c.reference, float) else c.reference
            lines.append(f"  {status} {c.column:>8} {c.row:<26} {comp} vs {ref}  {c.note}".rstrip())
        _emit(args, doc.to_dict(), "\n".join(lines))
    return 0 if doc.ok else 1


def cmd_export(args) -> int:
    if args.ineq:
        payload = load_polynomial(args.ineq).to_dict()
    elif args.expr:
        payload = load_expression(args.expr).to_dict()
    elif args.state:
        payload = parse_state(args.state).to_dict()
    else:
        raise ValueError("export needs --ineq, --expr or --state")
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bellforge", description="Bell polynomials: classical and quantum bounds")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, ineq=False):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--out", help="write output to this path")
        if ineq:
            p.add_argument("--ineq", required=True, help="catalog name or @polynomial.json")
            p.add_argument("--guard", type=int, default=ENUMERATION_GUARD, help="max deterministic strategies")

    common(sub.add_parser("catalog", help="list registered inequalities"))
    common(sub.add_parser("classical", help="exact classical bounds"), ineq=True)

    q = sub.add_parser("quantum", help="quantum value at given settings")
    common(q, ineq=True)
    q.add_argument("--settings", required=True, help='e.g. "X,Z" for every party or "X,Z;X,mos" per party')
    q.add_argument("--state", help="also evaluate on this state (ghz:n,d, quasi:n,gamma, ame43, bell+, file.json)")
    q.add_argument("--sweep", action="store_true", help="quasi-GHZ gamma sweep in the optimal-state frame")

    o = sub.add_parser("optimize", help="optimize settings for a lower bound")
    common(o, ineq=True)
    o.add_argument("--restarts", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--budget", type=int, default=3000, help="function evaluations per restart")
    o.add_argument("--method", choices=("lbfgs", "pattern"), default="lbfgs")
    o.add_argument("--refine", action="store_true", help="see-saw refinement after each local search")

    pr = sub.add_parser("prob", help="evaluate a probability-form expression")
    common(pr)
    pr.add_argument("--expr", required=True, help="cglmp:d, acin333, acin333:printed or @expr.json")
    pr.add_argument("--state", required=True)
    pr.add_argument("--settings", help="measure in eigenbases of these settings")
    pr.add_argument("--alphabet", default="roots", choices=("roots", "pm1", "residue"),
                    help="eigenvalue-to-outcome map for --settings")

    r = sub.add_parser("reproduce", help="recompute a reference table")
    common(r)
    r.add_argument("table", choices=TABLES)
    r.add_argument("--seed", type=int, default=7)
    r.add_argument("--restarts", type=int, default=3)
    r.add_argument("--budget", type=int, default=3000)
    r.add_argument("--csv", action="store_true", help="CSV with 6 significant digits")

    e = sub.add_parser("export", help="write a polynomial, expression or state as JSON")
    e.add_argument("--ineq")
    e.add_argument("--expr")
    e.add_argument("--state")
    e.add_argument("--out")
    return ap


COMMANDS = {
    "catalog": cmd_catalog, "classical": cmd_classical, "quantum": cmd_quantum, "optimize": cmd_optimize,
    "prob": cmd_prob, "reproduce": cmd_reproduce, "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"bellforge: {exc}", file=sys.stderr)
        return 3
    except (UnknownNameError, ContractError, BellforgeError, ValueError, FileNotFoundError) as exc:
        print(f"bellforge: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
