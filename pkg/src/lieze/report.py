"""Report sections and renderers.

Every section is a plain dict of strings, numbers, booleans and lists, so the
JSON rendering is byte-stable for a fixed input file and seed.  Expressions
are printed in the problem-file grammar, so reports re-parse.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from . import poly as P
from .expr import to_poly, to_text
from .parser import ProblemSpec, Settings, parse_problem
from .poly import Poly, sym
from .reduction import (ChangeOfVariables, ReducedEquation, consistency_check, equations_proportional,
                        reduce_by, second_stage_reduce)
from .symmetry import (Ansatz, VectorField, commutator_table, determining_system, expand_parametric,
                       field_rank, jacobi_holds, solve_nullspace, span_contains, span_equal)
from .verify import (EmptySampleRegion, GroupAction, ResidualReport, UnsupportedGenerator, residual,
                     solution_poly, transform_solution)


class InputError(ValueError):
    """Bad user input (unknown names, malformed flags); maps to exit code 2."""


@dataclass
class Loaded:
    path: str
    text: str
    digest: str
    spec: ProblemSpec


def load(path, require_equation: bool = True) -> Loaded:
    text = Path(path).read_text(encoding="utf-8")
    digest = "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Loaded(str(path), text, digest, parse_problem(text, require_equation))


def sub_seed(seed: int, section: str) -> int:
    """Deterministic per-section seed derived from the global one."""
    h = hashlib.sha256(f"{seed}\x00{section}".encode("utf-8")).digest()
    return int.from_bytes(h[:4], "big")


def delta_of(spec: ProblemSpec) -> Poly:
    return to_poly(spec.equation)


def leading_of(spec: ProblemSpec) -> tuple:
    return P.jet(spec.leading.dep, spec.leading.index)


def fields_of(spec: ProblemSpec, names: Optional[Sequence[str]] = None) -> List[VectorField]:
    names = list(spec.fields) if names is None else list(names)
    out = []
    for n in names:
        if n not in spec.fields:
            raise InputError(f"unknown generator '{n}'")
        coeffs = tuple(to_poly(c) for c in spec.fields[n])
        out.append(VectorField(spec.independent, spec.dependent, coeffs, n))
    return out


def field_text(v: VectorField) -> Dict[str, str]:
    comps = list(v.variables) + [v.dependent]
    return {c: to_text(p) for c, p in zip(comps, v.coeffs) if p.terms}


def combo_text(coords: Optional[Sequence[Fraction]], labels: Sequence[str]) -> str:
    """``[2, 0, -1]`` -> ``2*V1 - V3`` (``None`` means outside the span)."""
    if coords is None:
        return "NOT-IN-SPAN"
    p = Poly()
    for c, lab in zip(coords, labels):
        if c:
            p = p + Poly.symbol(lab).scale(c)
    return to_text(p)


# ---------------------------------------------------------------------------
# symmetries
# ---------------------------------------------------------------------------

def section_symmetries(spec: ProblemSpec, ansatz: Optional[Tuple[int, int]] = None,
                       reference: Optional[List[VectorField]] = None) -> dict:
    a = Ansatz(*(ansatz or spec.ansatz))
    delta = delta_of(spec)
    system = determining_system(delta, a, leading_of(spec), spec.independent, spec.dependent, spec.max_order)
    gens = solve_nullspace(system)
    out = {
        "ansatz": {"indep_degree": a.indep_degree, "dep_degree": a.dep_degree},
        "unknowns": system.ncols,
        "equations": len(system.matrix),
        "dimension": len(gens),
        "leading": to_text(Poly.atom(leading_of(spec))),
        "leading_coefficient": to_text(system.kappa),
        "cleared_power": system.cleared_power,
        "generators": [{"name": g.name, "components": field_text(g)} for g in gens],
        "scope": f"complete within polynomial ansatz of degree {a.indep_degree} in "
                 f"({', '.join(spec.independent)}) and {a.dep_degree} in {spec.dependent}",
    }
    diags = []
    if system.kappa is not None and len(system.kappa.terms) == 1:
        zero = [to_text(Poly.atom(at)) for at, _ in next(iter(system.kappa.terms))]
        if zero:
            diags.append(f"leading coefficient {to_text(system.kappa)} vanishes on "
                         + " or ".join(f"{z}=0" for z in zero) + "; generators are derived off that locus")
    if reference is None and spec.fields:
        reference = fields_of(spec)
    if reference:
        eq = span_equal(gens, reference)
        out["reference"] = [r.name for r in reference]
        out["span_match"] = "PASS" if eq else "FAIL"
        out["contained_in_reference"] = span_contains(reference, gens)
        out["reference_contained"] = span_contains(gens, reference)
    if spec.infinitesimals is not None:
        inf = VectorField(spec.independent, spec.dependent, tuple(to_poly(c) for c in spec.infinitesimals), "X")
        params = sorted({s[1] for c in inf.coeffs for s in c.symbols()} - set(spec.independent))
        pieces = [f for f in expand_parametric(inf, params) if not f.is_zero()]
        outside = [f.name for f in pieces if not span_contains(gens, [f])]
        out["infinitesimals"] = {
            "parameters": params,
            "in_span": not outside,
            "outside": outside,
            "rank": field_rank(pieces) if pieces else 0,
        }
        for f in pieces:
            if f.name in outside:
                diags.append(f"printed infinitesimals: the {f.name} part "
                             f"{{{', '.join(f'{k} = {v}' for k, v in field_text(f).items())}}} is not a symmetry")
    out["diagnostics"] = diags
    return out


# ---------------------------------------------------------------------------
# commutators
# ---------------------------------------------------------------------------

def reference_table(spec: ProblemSpec, labels: Sequence[str]) -> Optional[List[List[List[Fraction]]]]:
    if not spec.table:
        return None
    rows = []
    for lab in labels:
        row = []
        for e in spec.table[lab]:
            p = to_poly(e)
            coords = [Fraction(P.evaluate(p.coeff_of(sym(l), 1), {}, "exact")) if p.degree_in(sym(l)) else Fraction(0)
                      for l in labels]
            row.append(coords)
        rows.append(row)
    return rows


def section_commute(spec: ProblemSpec, basis: Optional[List[VectorField]] = None,
                    reference: Optional[ProblemSpec] = None) -> dict:
    if basis is None:
        basis = fields_of(spec) if spec.fields else solve_nullspace(
            determining_system(delta_of(spec), Ansatz(*spec.ansatz), leading_of(spec),
                               spec.independent, spec.dependent, spec.max_order))
    table = commutator_table(basis)
    labels = table.labels
    entries = [[combo_text(e, labels) for e in row] for row in table.entries]
    out = {
        "basis": [{"name": lab, "components": field_text(b)} for lab, b in zip(labels, basis)],
        "labels": labels,
        "entries": entries,
        "structure_constants": [{"i": labels[i], "j": labels[j], "k": labels[k], "value": str(v)}
                                for (i, j, k), v in sorted(table.structure_constants().items())],
        "antisymmetric": table.antisymmetric(),
        "jacobi": jacobi_holds(basis),
        "closed": table.closed(),
    }
    ref_spec = reference or spec
    ref = reference_table(ref_spec, labels) if ref_spec.table and set(labels) <= set(ref_spec.table) else None
    if ref is not None:
        mism = []
        n = len(labels)
        for i in range(n):
            for j in range(n):
                if table.entries[i][j] != ref[i][j]:
                    mism.append({"row": labels[i], "column": labels[j],
                                 "computed": entries[i][j], "reference": combo_text(ref[i][j], labels)})
        out["reference_matches"] = n * n - len(mism)
        out["reference_entries"] = n * n
        out["reference_mismatches"] = mism
        out["table_match"] = "PASS" if not mism else "FAIL"
    return out


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

def _undifferentiated_terms(p: Poly, dependent: str) -> List[str]:
    out = []
    for m, c in sorted(p.terms.items()):
        if not any(at[0] == "j" and at[2] for at, _ in m) and any(at[0] == "j" for at, _ in m):
            out.append(to_text(Poly({m: c})))
    return out


def _stage(delta: Poly, cov: ChangeOfVariables, settings: Settings, seed: int, label: str) -> Tuple[dict, ReducedEquation]:
    re = reduce_by(delta, cov, check_seed=sub_seed(seed, f"rank:{label}"))
    stats = consistency_check(delta, cov, re, sub_seed(seed, f"consistency:{label}"),
                              points=settings.points, tol=settings.tol, box=settings.box)
    out = {
        "name": label,
        "variables": list(re.variables),
        "dependent": re.dependent,
        "suppressed": list(re.suppressed),
        "equation": to_text(re.expression),
        "order": re.order,
        "factor": to_text(re.factor_display()),
        "consistency": {"points": stats.points, "max_rel_error": stats.max_rel_error,
                        "tol": stats.tol, "seed": sub_seed(seed, f"consistency:{label}"),
                        "passed": stats.passed},
    }
    diags = []
    if re.note:
        diags.append(re.note)
    if cov.reference is not None:
        v = equations_proportional(re.expression, cov.reference, seed=sub_seed(seed, f"compare:{label}"),
                                   tol=settings.tol, box=settings.box)
        out["reference"] = {
            "text": cov.reference_text,
            "verdict": v.label,
            "ratio": v.ratio,
            "factor_varies": v.factor_varies,
            "stripped": list(v.stripped),
            "max_spread": v.max_spread,
            "ratios": v.ratios,
            "seed": sub_seed(seed, f"compare:{label}"),
        }
        if not v.proportional:
            diags.append(f"reference equation for {label} is not proportional to the derived one")
        elif v.factor_varies:
            diags.append(f"reference equation for {label} agrees up to a non-constant factor")
        if v.note:
            diags.append(v.note)
        bare = _undifferentiated_terms(cov.reference, re.dependent)
        if bare and not _undifferentiated_terms(re.expression, re.dependent):
            diags.append(f"reference terms without derivatives: {', '.join(bare)}")
    out["diagnostics"] = diags
    return out, re


def section_reduce(spec: ProblemSpec, names: Optional[Sequence[str]] = None, stage2: bool = False,
                   seed: Optional[int] = None) -> dict:
    settings = spec.settings
    seed = settings.seed if seed is None else seed
    names = list(spec.substitutions) if not names else list(names)
    delta = delta_of(spec)
    results = []
    for name in names:
        if name not in spec.substitutions:
            raise InputError(f"unknown substitution '{name}'")
        cov = ChangeOfVariables.from_block(spec.substitutions[name])
        first, re = _stage(delta, cov, settings, seed, name)
        entry = {"substitution": name, "stage1": first}
        if stage2:
            if cov.stage2 is None:
                entry["stage2"] = None
            else:
                entry["stage2"], _ = _stage(re.expression, cov.stage2, settings, seed, f"{name}/stage2")
        results.append(entry)
    return {"reductions": results}


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def residual_dict(r: ResidualReport) -> dict:
    return {
        "name": r.name, "verdict": r.verdict, "mode": r.mode, "seed": r.seed, "tol": r.tol,
        "points": len(r.points), "excluded": r.excluded, "symbolic_zero": r.symbolic_zero,
        "max_abs": r.max_abs, "median_abs": r.median_abs, "max_normalized": r.max_normalized,
        "samples": [{"point": p, "residual": res, "scale": s, "normalized": n}
                    for p, res, s, n in zip(r.points, r.residuals, r.scales, r.normalized)],
    }


def parse_transform(text: str) -> Tuple[str, Fraction]:
    gen, sep, eps = text.partition(":")
    if not sep or not gen:
        raise InputError(f"--transform expects GEN:EPS, got '{text}'")
    try:
        return gen, Fraction(eps)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad epsilon '{eps}'") from None


def verify_one(spec: ProblemSpec, name: str, settings: Settings, seed: int,
               transform: Optional[Tuple[str, Fraction]] = None) -> dict:
    sol = spec.solutions[name]
    delta = delta_of(spec)
    s = sub_seed(seed, f"verify:{name}" + (f":{transform[0]}:{transform[1]}" if transform else ""))
    if sol.expression is None:
        return {"name": name, "verdict": "SKIPPED", "reason": f"unsupported function {sol.unsupported}"}
    try:
        u = solution_poly(sol)
        if transform is not None:
            action = GroupAction(fields_of(spec, [transform[0]])[0], transform[1])
            sol, u = transform_solution(sol, action, u)
        rep = residual(delta, sol, spec.independent, spec.dependent, settings, seed=s, u=u,
                       constants=spec.constants)
    except EmptySampleRegion as exc:
        return {"name": name, "verdict": "FAILED-SAMPLING", "reason": str(exc)}
    out = residual_dict(rep)
    out["expression"] = to_text(u)
    return out


def section_verify(spec: ProblemSpec, names: Optional[Sequence[str]] = None, transform: Optional[str] = None,
                   seed: Optional[int] = None) -> dict:
    settings = spec.settings
    seed = settings.seed if seed is None else seed
    names = list(spec.solutions) if not names else list(names)
    for n in names:
        if n not in spec.solutions:
            raise InputError(f"unknown solution '{n}'")
    tr = parse_transform(transform) if transform else None
    if tr is not None and tr[0] not in spec.fields:
        raise InputError(f"unknown generator '{tr[0]}'")
    return {"verifications": [verify_one(spec, n, settings, seed, tr) for n in names]}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def envelope(command: str, loaded: Loaded, settings: Settings, section: dict) -> dict:
    diags = []
    for key in ("diagnostics",):
        diags += section.get(key, [])
    for red in section.get("reductions", []):
        for st in ("stage1", "stage2"):
            if red.get(st):
                diags += [f"{red[st]['name']}: {d}" for d in red[st]["diagnostics"]]
    return {
        "tool": "lieze",
        "version": __version__,
        "command": command,
        "input": Path(loaded.path).name,
        "input_digest": loaded.digest,
        "settings": settings.as_dict(),
        command: section,
        "diagnostics": diags,
    }


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _table(rows: List[List[str]], header: Optional[List[str]] = None) -> List[str]:
    rows = ([header] if header else []) + rows
    if not rows:
        return []
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    if header:
        lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def _text_symmetries(s: dict) -> List[str]:
    lines = [f"ansatz: degree {s['ansatz']['indep_degree']} in variables, {s['ansatz']['dep_degree']} in dependent",
             f"determining system: {s['equations']} equations in {s['unknowns']} unknowns "
             f"(cleared power {s['cleared_power']})",
             f"leading {s['leading']}, coefficient {s['leading_coefficient']}",
             f"symmetry algebra dimension: {s['dimension']}", ""]
    lines += _table([[g["name"], "; ".join(f"{k} = {v}" for k, v in g["components"].items())]
                     for g in s["generators"]], ["name", "components"])
    if "span_match" in s:
        lines += ["", f"span vs reference ({', '.join(s['reference'])}): {s['span_match']}"]
    if "infinitesimals" in s:
        inf = s["infinitesimals"]
        lines.append("printed infinitesimals: " + ("in span" if inf["in_span"]
                                                   else "not in span (" + ", ".join(inf["outside"]) + ")"))
    lines.append(s["scope"])
    return lines


def _text_commute(s: dict) -> List[str]:
    labs = s["labels"]
    lines = _table([[lab] + row for lab, row in zip(labs, s["entries"])], ["[,]"] + labs)
    lines += ["", f"antisymmetric: {s['antisymmetric']}", f"jacobi: {s['jacobi']}", f"closed: {s['closed']}"]
    if "table_match" in s:
        lines.append(f"reference table: {s['table_match']} ({s['reference_matches']}/{s['reference_entries']} entries)")
        for m in s["reference_mismatches"]:
            lines.append(f"  [{m['row']},{m['column']}] computed {m['computed']}, reference {m['reference']}")
    return lines


def _text_stage(st: dict) -> List[str]:
    c = st["consistency"]
    lines = [f"[{st['name']}] variables ({', '.join(st['variables'])}) -> {st['dependent']}, order {st['order']}",
             f"  factor: {st['factor']}",
             f"  equation: {st['equation']} = 0",
             f"  consistency: {'PASS' if c['passed'] else 'FAIL'} max rel error {c['max_rel_error']:.3e} "
             f"at {c['points']} points (tol {c['tol']}, seed {c['seed']})"]
    if "reference" in st:
        r = st["reference"]
        extra = f", ratio {r['ratio']}" if r["ratio"] else ""
        if r["factor_varies"]:
            extra += ", ratio varies with base point"
        lines.append(f"  reference: {r['verdict']}{extra}")
    for d in st["diagnostics"]:
        lines.append(f"  note: {d}")
    return lines


def _text_reduce(s: dict) -> List[str]:
    lines = []
    for red in s["reductions"]:
        lines += _text_stage(red["stage1"])
        if red.get("stage2"):
            lines += _text_stage(red["stage2"])
        elif "stage2" in red:
            lines.append(f"[{red['substitution']}/stage2] none declared")
    return lines


def _text_verify(s: dict) -> List[str]:
    rows = []
    for v in s["verifications"]:
        if "samples" not in v:
            rows.append([v["name"], v["verdict"], "", "", v.get("reason", "")])
        else:
            rows.append([v["name"], v["verdict"], f"{v['max_normalized']:.3e}", str(v["points"]),
                         f"{v['mode']}, seed {v['seed']}"])
    return _table(rows, ["solution", "verdict", "max normalized", "points", "context"])


TEXT = {"symmetries": _text_symmetries, "commute": _text_commute, "reduce": _text_reduce, "verify": _text_verify}


def render_text(report: dict) -> str:
    cmd = report["command"]
    st = report["settings"]
    lines = [f"lieze {report['version']} {cmd} {report['input']}",
             f"input {report['input_digest']}",
             f"seed {st['seed']}  tol {st['tol']}  points {st['points']}", ""]
    lines += TEXT[cmd](report[cmd])
    if report["diagnostics"]:
        lines += ["", "diagnostics:"] + [f"  - {d}" for d in report["diagnostics"]]
    return "\n".join(lines) + "\n"
