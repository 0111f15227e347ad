"""``bbres`` command line: chart changes, point residues, deformation sweeps.

Exit codes: 0 success (possibly with warnings), 2 invalid input,
3 more failed homotopy paths than ``--max-path-failures`` allows.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from . import __version__
from .deform import DeformationFamily, group_paths, grouped_residues, sweep, witness_residual
from .polycore import MultiPoly, PolyParseError, is_homogeneous, parse_poly
from .projfield import AffineVectorField, ProjectiveAmbient, pushforward_chart
from .residue import (
    ChernMonomial,
    all_monomials,
    bb_residue,
    chern_number_projective,
    residual_attribution,
    verify_sum_theorem,
)
from .solver import TrackerSettings, singular_set

log = logging.getLogger("bbres")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def load_schema(name: str) -> dict:
    return json.loads(resources.files("bbres").joinpath("schemas", name).read_text())


# -- spec files ---------------------------------------------------------------------

@dataclass
class FieldSpec:
    """A parsed and validated field-specification file."""

    raw: dict
    field: AffineVectorField
    variables: list[str]
    parameter: str | None
    witnesses: dict[str, list[MultiPoly]]
    monomials: list[ChernMonomial]
    deformation: dict | None

    @property
    def n(self) -> int:
        return self.field.n


def _line_of(text: str, needle: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return 0


def parse_spec_text(text: str, source: str = "<spec>") -> FieldSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}:{exc.lineno}: {exc.msg}") from None
    try:
        jsonschema.validate(raw, load_schema("spec.schema.json"))
    except jsonschema.ValidationError as exc:
        key = next((p for p in reversed(list(exc.absolute_path)) if isinstance(p, str)), None)
        line = _line_of(text, f'"{key}"') if key else 1
        where = "/".join(str(p) for p in exc.absolute_path) or "(top level)"
        raise InputError(f"{source}:{line}: {where}: {exc.message}") from None

    n = raw["dimension"]
    variables = raw["variables"]
    parameter = raw.get("parameter")
    if not 0 <= raw["chart"] <= n:
        raise InputError(f"{source}:{_line_of(text, 'chart')}: chart must lie in 0..{n}")
    if len(variables) != n:
        raise InputError(f"{source}:{_line_of(text, 'variables')}: expected {n} variable names")
    if len(raw["components"]) != n:
        raise InputError(f"{source}:{_line_of(text, 'components')}: expected {n} components")

    def parse(expr, names, param):
        try:
            return parse_poly(expr, names, param)
        except (PolyParseError, ValueError) as exc:
            raise InputError(f"{source}:{_line_of(text, json.dumps(expr))}: {expr!r}: {exc}") from None

    comps = [parse(e, variables, parameter) for e in raw["components"]]
    field = AffineVectorField(ProjectiveAmbient(n), raw["chart"], tuple(comps))

    hom_names = [f"x{i}" for i in range(n + 1)]
    witnesses = {}
    for name, eqs in raw.get("witnesses", {}).items():
        polys = [parse(e, hom_names, None) for e in eqs]
        for e, p in zip(eqs, polys):
            if not is_homogeneous(p):
                raise InputError(f"{source}:{_line_of(text, json.dumps(e))}: witness {name!r}: {e!r} is not homogeneous")
        witnesses[name] = polys

    monomials = []
    for label in raw.get("monomials", []):
        try:
            m = ChernMonomial.parse(label, n)
        except ValueError as exc:
            raise InputError(f"{source}:{_line_of(text, json.dumps(label))}: {exc}") from None
        if m.degree != n:
            raise InputError(f"{source}:{_line_of(text, json.dumps(label))}: {label} has degree {m.degree}, expected {n}")
        monomials.append(m)
    deformation = raw.get("deformation")
    if deformation is not None and deformation["count"] < 3:
        raise InputError(f"{source}:{_line_of(text, 'count')}: extrapolation requires at least 3 points")
    return FieldSpec(raw, field, variables, parameter, witnesses, monomials or all_monomials(n), deformation)


def load_spec(path: str | Path) -> FieldSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_spec_text(text, str(path))


# -- report helpers ---------------------------------------------------------------------

def _c(z) -> list[float]:
    z = complex(z)
    return [z.real + 0.0, z.imag + 0.0]


def _f(x) -> float | None:
    x = float(x)
    return x if np.isfinite(x) else None


def _fmt(z, digits: int = 10) -> str:
    z = complex(z) + 0j
    z = complex(z.real + 0.0, z.imag + 0.0)
    if abs(z.imag) <= 1e-12 * max(1.0, abs(z.real)):
        return f"{z.real:.{digits}g}"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}j"


def _settings(args) -> TrackerSettings:
    return TrackerSettings(seed=args.seed, newton_tol=args.tol_newton, degenerate_tol=args.tol_degenerate)


def _config(spec: FieldSpec, args, **extra) -> dict:
    cfg = {
        "spec": spec.raw,
        "seed": args.seed,
        "tol_newton": args.tol_newton,
        "tol_degenerate": args.tol_degenerate,
        "max_path_failures": args.max_path_failures,
        "monomials": [m.label for m in spec.monomials],
    }
    cfg.update(extra)
    return cfg


def _singularity_row(s, witnesses) -> dict:
    labels = [name for name, eqs in witnesses.items() if witness_residual(s.point, eqs) < 1e-6]
    return {
        "point": [_c(c) for c in s.point.coords],
        "pretty": s.point.pretty(),
        "chart": s.chart_index,
        "affine": [_c(c) for c in s.affine_coords],
        "residual": _f(s.residual_norm),
        "det": _c(s.det),
        "nondegenerate": bool(s.nondegenerate),
        "witnesses": labels,
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_report(report: dict, path: str | None) -> None:
    jsonschema.validate(report, load_schema("report.schema.json"))
    if path:
        Path(path).write_text(dump_report(report), encoding="utf-8")


# -- commands ---------------------------------------------------------------------------

def cmd_chart(args) -> int:
    spec = load_spec(args.spec)
    if not 0 <= args.to <= spec.n:
        raise InputError(f"target chart {args.to} out of range 0..{spec.n}")
    if args.to == spec.field.chart_index:
        raise InputError("target chart equals source")
    moved = pushforward_chart(spec.field, args.to)
    param = spec.parameter or "t"
    print(f"chart {args.to} (x{args.to} != 0): " + ", ".join(moved.format(spec.variables, param)))
    print(f"clearing exponent: {moved.clearing_exponent}")
    return EXIT_OK


def _failure_exit(failed: int, args, warnings: list[str]) -> int:
    if failed:
        warnings.append(f"{failed} homotopy path(s) failed")
    return EXIT_NUMERIC if failed > args.max_path_failures else EXIT_OK


def cmd_residues(args) -> int:
    spec = load_spec(args.spec)
    if spec.field.has_parameter and args.t is None:
        raise InputError("--t is required: the field depends on the parameter")
    t = 0.0 if args.t is None else args.t
    settings = _settings(args)
    sset = singular_set(spec.field, t, settings)
    warnings: list[str] = []
    n = spec.n

    rows = [_singularity_row(s, spec.witnesses) for s in sset.points]
    residues = []
    known: dict[str, list] = {m.label: [] for m in spec.monomials}
    for s in sset.nondegenerate:
        for m in spec.monomials:
            rec = bb_residue(s, m, settings.degenerate_tol)
            known[m.label].append(rec)
            residues.append({"point": s.point.pretty(), "monomial": m.label, "value": _c(rec.value)})

    sums, attributions = [], []
    if sset.degenerate:
        for s in sset.degenerate:
            warnings.append(f"degenerate singular point {s.point.pretty()} (chart {s.chart_index}); residue omitted")
        labels = sorted({w for r in rows if not r["nondegenerate"] for w in r["witnesses"]})
        label = "+".join(labels) if labels else "non-isolated"
        warnings.append(f"possible non-isolated singular locus: {label}")
        for m in spec.monomials:
            rec = residual_attribution(known[m.label], m, n, label)
            attributions.append({"label": label, "monomial": m.label, "value": _c(rec.value)})
    else:
        for m in spec.monomials:
            rep = verify_sum_theorem(sset.points, m, n)
            sums.append({"monomial": m.label, "sum": _c(rep.sum), "target": rep.target, "residual": _f(rep.residual)})

    stats = [
        {"chart": k, "bezout": r.bezout, "finite": r.finite_count,
         "at_infinity": r.at_infinity_count, "failed": len(r.failures)}
        for k, r in sorted(sset.per_chart.items())
    ]
    failed = sum(s["failed"] for s in stats)
    code = _failure_exit(failed, args, warnings)

    report = {
        "command": "residues",
        "version": __version__,
        "config": _config(spec, args, t=t),
        "singularities": rows,
        "residues": residues,
        "sum_theorem": sums,
        "attributions": attributions,
        "path_stats": stats,
        "warnings": warnings,
    }
    _write_report(report, args.json)

    labels = [m.label for m in spec.monomials]
    width = max([len(s.point.pretty()) for s in sset.points] + [5])
    print(f"singular points at t = {t:g}")
    print(f"  {'point':<{width}} {'chart':>5} {'|det J|':>11} {'residual':>10}  " + "  ".join(f"{l:>14}" for l in labels))
    for s in sset.points:
        vals = [bb_residue(s, m).value for m in spec.monomials] if s.nondegenerate else None
        cells = "  ".join(f"{_fmt(v):>14}" for v in vals) if vals else "  (degenerate)"
        print(f"  {s.point.pretty():<{width}} {s.chart_index:>5} {abs(s.det):>11.3e} {s.residual_norm:>10.1e}  {cells}")
    for row in sums:
        print(f"  sum {row['monomial']:<8} = {_fmt(complex(*row['sum']))}  (target {row['target']}, residual {row['residual']:.1e})")
    if attributions:
        vals = ", ".join(_fmt(complex(*row["value"])) for row in attributions)
        print(f"  {attributions[0]['label']}: {vals}  ({', '.join(labels)} by residual attribution)")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return code


def cmd_sweep(args) -> int:
    spec = load_spec(args.spec)
    if spec.deformation is None:
        raise InputError("spec has no deformation block")
    d = spec.deformation
    try:
        family = DeformationFamily(spec.field, d["t_start"], d["ratio"], d["count"], d.get("t0", 0.0), spec.parameter or "t")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    settings = _settings(args)
    result = sweep(family, settings)
    groups = group_paths(result.paths, spec.witnesses)
    warnings: list[str] = []
    for g in groups:
        if g.ambiguous:
            warnings.append(f"ambiguous grouping: {g.label} (paths {list(g.members)})")
    for p in result.paths:
        if p.status != "converged":
            warnings.append(f"path {p.id} {p.status}")

    series, path_series = [], []
    for m in spec.monomials:
        gs = grouped_residues(groups, result.paths, m, result.grid, family.t0)
        for g in groups:
            entry = {"monomial": m.label, "group": g.label,
                     "values": [None if v is None else _c(v) for v in gs.values[g.label]],
                     "limit": None, "error": None}
            if len(gs.series(g.label)) >= 3:
                est = gs.limit(g.label)
                entry["limit"], entry["error"] = _c(est.limit), _f(est.error)
            else:
                warnings.append(f"group {g.label}, {m.label}: fewer than 3 usable grid points")
            for flag in gs.flags[g.label]:
                if flag:
                    warnings.append(f"group {g.label}, {m.label}: {flag}")
            series.append(entry)
        for p in result.paths:
            vals = []
            for t in result.grid:
                s = p.at(t)
                vals.append(_c(bb_residue(s, m).value) if s is not None and s.nondegenerate else None)
            path_series.append({"path": p.id, "monomial": m.label, "values": vals})

    failed = sum(len(v) for v in result.failures.values())
    code = _failure_exit(failed, args, warnings)
    member_of = {pid: g.label for g in groups for pid in g.members}
    report = {
        "command": "sweep",
        "version": __version__,
        "config": _config(spec, args),
        "grid": list(result.grid),
        "paths": [
            {"id": p.id, "status": p.status, "group": member_of.get(p.id),
             "limit": p.limit_point.pretty(), "limit_coords": [_c(c) for c in p.limit_point.coords],
             "limit_error": _f(p.limit_error) if p.limit_error is not None else None,
             "samples": [{"t": t, "point": s.point.pretty(), "chart": s.chart_index} for t, s in p.samples]}
            for p in result.paths
        ],
        "groups": [
            {"label": g.label, "members": list(g.members), "ambiguous": g.ambiguous,
             "witness": None if g.witness is None else spec.raw["witnesses"][g.label]}
            for g in groups
        ],
        "series": series,
        "path_series": path_series,
        "warnings": warnings,
    }
    _write_report(report, args.json)

    print(f"sweep over {len(result.grid)} values, t = {result.grid[0]:g} ... {result.grid[-1]:g}")
    print("paths:")
    for p in result.paths:
        print(f"  #{p.id}  {p.status:<9} group {member_of.get(p.id)!s:<12} limit {p.limit_point.pretty()}")
    print("grouped residue limits:")
    for e in series:
        lim = "n/a" if e["limit"] is None else _fmt(complex(*e["limit"]), 8)
        err = "" if e["error"] is None else f"  +/- {e['error']:.1e}"
        print(f"  {e['group']:<14} {e['monomial']:<8} -> {lim}{err}")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return code


def cmd_chern(args) -> int:
    try:
        m = ChernMonomial.parse(args.phi, args.dim)
        value = chern_number_projective(args.dim, m)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(value)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for the homotopy gamma and patch (default 0)")
    common.add_argument("--tol-newton", type=float, default=1e-10, help="residual bound for accepted zeros")
    common.add_argument("--tol-degenerate", type=float, default=1e-10,
                        help="|det J| <= tol * (max row norm)^n counts as degenerate")
    common.add_argument("--max-path-failures", type=int, default=0,
                        help="failed homotopy paths tolerated before exiting with code 3")

    parser = argparse.ArgumentParser(
        prog="bbres",
        description="Baum-Bott residues of polynomial vector fields on P^n. "
        "Charts are 0-based: chart k is {x_k != 0}, so the 1-based x_4 != 0 is chart 3.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chart", parents=[common], help="express the field in another chart")
    p.add_argument("spec")
    p.add_argument("--to", type=int, required=True, help="target chart index")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("residues", parents=[common], help="singular points and their residues at one t")
    p.add_argument("spec")
    p.add_argument("--t", type=float, default=None, help="parameter value (required for families)")
    p.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    p.set_defaults(func=cmd_residues)

    p = sub.add_parser("sweep", parents=[common], help="grouped residues along the deformation grid")
    p.add_argument("spec")
    p.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("chern", parents=[common], help="Chern number of T P^n")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--phi", required=True, help='monomial label, e.g. "c1^3" or "c1*c2"')
    p.set_defaults(func=cmd_chern)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
