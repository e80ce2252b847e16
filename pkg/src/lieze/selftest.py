"""Acceptance suite run by ``lieze selftest``.

Each criterion returns ``(passed, detail)`` where ``detail`` is a small,
deterministic dict (no timings) so that ``selftest --json`` is byte-stable.
"""

from __future__ import annotations

import dataclasses
import json
import time
from fractions import Fraction
from importlib import resources
from typing import Callable, List, Optional, Tuple

import mpmath

from . import __version__
from .fuzz import PROPERTIES, run_suite
from .report import (Loaded, delta_of, fields_of, leading_of, load, render_json, section_commute,
                     section_reduce, section_symmetries, section_verify, sub_seed, verify_one)
from .symmetry import jet_order_of
from .verify import on_manifold_residuals, residual_at, solution_poly

EPSILONS = (Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1))


def data_path(name: str):
    return resources.files("lieze") / "data" / name


def c1_symmetries(L: Loaded, seed: int):
    t0 = time.perf_counter()
    s = section_symmetries(L.spec, (2, 1))
    fast = time.perf_counter() - t0 < 120
    ok = s["dimension"] == 5 and s.get("span_match") == "PASS" and fast
    return ok, {"dimension": s["dimension"], "span_match": s.get("span_match"), "under_120s": fast}


def c2_commute(L: Loaded, seed: int):
    a = section_commute(L.spec)
    b_loaded = load(data_path("reduced_algebra.lie"))
    b = section_commute(b_loaded.spec)
    detail = {}
    ok = True
    for key, s in (("zoomeron", a), ("reduced", b)):
        match = s.get("table_match") == "PASS"
        ok = ok and match and s["antisymmetric"] and s["jacobi"]
        detail[key] = {"matches": s.get("reference_matches"), "entries": s.get("reference_entries"),
                       "antisymmetric": s["antisymmetric"], "jacobi": s["jacobi"],
                       "mismatches": [f"[{m['row']},{m['column']}]" for m in s.get("reference_mismatches", [])]}
    return ok, detail


def c3_on_manifold(L: Loaded, seed: int):
    spec = L.spec
    delta = delta_of(spec)
    order = jet_order_of(delta, spec.dependent)
    worst = {}
    for f in fields_of(spec):
        r = on_manifold_residuals(delta, f, leading_of(spec), order, sub_seed(seed, f"manifold:{f.name}"),
                                  points=max(20, spec.settings.points))
        worst[f.name] = max(r)
    ok = len(worst) == 5 and all(v <= 1e-8 for v in worst.values())
    return ok, {"max_normalized": worst, "tol": 1e-8}


def c4_reduce(L: Loaded, seed: int):
    s = section_reduce(L.spec, stage2=True, seed=seed)
    rows = {}
    ok = True
    for red in s["reductions"]:
        for key in ("stage1", "stage2"):
            st = red.get(key)
            if not st:
                continue
            c = st["consistency"]
            good = c["passed"] and c["points"] >= 20 and c["max_rel_error"] <= 1e-9
            verdict = st.get("reference", {}).get("verdict")
            ok = ok and good and verdict is not None
            rows[st["name"]] = {"consistent": good, "verdict": verdict}
    return ok, rows


def _every_term_has(delta, var: str) -> bool:
    return all(any(at[0] == "j" and var in at[2] for at, _ in m) for m in delta.terms)


def c5_verify(L: Loaded, seed: int):
    spec = L.spec
    delta = delta_of(spec)
    lemma = _every_term_has(delta, "x")
    detail = {"x_derivative_lemma": lemma}
    ok = lemma
    for name in ("eq216", "sec32"):
        v = verify_one(spec, name, spec.settings, seed)
        zero = v.get("symbolic_zero") is True and v.get("max_abs") == 0
        detail[name] = v["verdict"]
        ok = ok and zero and v["verdict"] == "PASS (exact)"
    oracle = json.loads(data_path("oracle_sec33b.json").read_text(encoding="utf-8"))
    u = solution_poly(spec.solutions[oracle["candidate"]])
    tol = Fraction(oracle["tolerance"])
    agree = True
    ours_pass = True
    with mpmath.workdps(60):
        for entry in oracle["points"]:
            r, scale = residual_at(delta, u, spec.dependent, entry["point"], dps=60)
            n = r / scale
            ref = mpmath.mpf(entry["normalized"])
            agree = agree and abs(n - ref) <= mpmath.mpf(10) ** -40 * max(1, abs(ref))
            ours_pass = ours_pass and abs(n) <= mpmath.mpf(tol.numerator) / tol.denominator
    ours = "PASS" if ours_pass else "FAIL"
    sampled = verify_one(spec, oracle["candidate"], spec.settings, seed)["verdict"]
    detail["sec33b"] = {"oracle": oracle["verdict"], "fixed_points": ours, "sampled": sampled,
                        "values_agree": agree}
    ok = ok and agree and ours == oracle["verdict"] and sampled.split()[0] == oracle["verdict"]
    return ok, detail


def c6_transform(L: Loaded, seed: int):
    spec = L.spec
    passing = [n for n in spec.solutions
               if verify_one(spec, n, spec.settings, seed)["verdict"].startswith("PASS")]
    checks = 0
    failed = []
    for n in passing:
        for f in spec.fields:
            for eps in EPSILONS:
                v = verify_one(spec, n, spec.settings, seed, (f, eps))
                checks += 1
                if not v["verdict"].startswith("PASS"):
                    failed.append(f"{n}:{f}:{eps}")
    return checks >= 20 and not failed, {"solutions": passing, "checks": checks, "failed": failed}


def c7_properties(L: Loaded, seed: int):
    detail = {}
    ok = True
    for name in PROPERTIES:
        r = run_suite(name, 500, seed)
        detail[name] = {"cases": r.cases, "skipped": r.skipped, "failures": len(r.failures)}
        ok = ok and r.passed and r.cases >= 500
    return ok, detail


def c8_determinism(L: Loaded, seed: int):
    def once():
        spec = L.spec
        parts = [section_symmetries(spec), section_commute(spec),
                 section_reduce(spec, ["V4"], stage2=True, seed=seed), section_verify(spec, seed=seed)]
        return render_json({"parts": parts})

    a, b = once(), once()
    return a == b, {"identical": a == b, "bytes": len(a)}


CRITERIA: List[Tuple[int, str, Callable]] = [
    (1, "symmetry recovery", c1_symmetries),
    (2, "commutator tables", c2_commute),
    (3, "on-manifold invariance", c3_on_manifold),
    (4, "reduction consistency", c4_reduce),
    (5, "solution verification", c5_verify),
    (6, "symmetry maps solutions", c6_transform),
    (7, "property suites", c7_properties),
    (8, "determinism", c8_determinism),
]


def run(path=None, seed: Optional[int] = None, only: Optional[List[int]] = None) -> dict:
    L = load(path if path is not None else data_path("zoomeron.lie"))
    if seed is not None:
        L.spec.settings = dataclasses.replace(L.spec.settings, seed=seed)
    seed = L.spec.settings.seed
    results = []
    for cid, name, fn in CRITERIA:
        if only and cid not in only:
            continue
        try:
            ok, detail = fn(L, seed)
        except Exception as exc:  # a crash is a failed criterion, not a crashed selftest
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        results.append({"id": cid, "name": name, "passed": bool(ok), "detail": detail})
    first = next((r for r in results if not r["passed"]), None)
    return {
        "tool": "lieze",
        "version": __version__,
        "input_digest": L.digest,
        "seed": seed,
        "criteria": results,
        "passed": first is None,
        "first_failure": None if first is None else f"criterion {first['id']} ({first['name']})",
    }


def render_text(summary: dict) -> str:
    lines = [f"lieze {summary['version']} selftest", f"input {summary['input_digest']}",
             f"seed {summary['seed']}"]
    for r in summary["criteria"]:
        lines.append(f"criterion {r['id']} {r['name']}: {'PASS' if r['passed'] else 'FAIL'}")
    lines.append("selftest: " + ("PASS" if summary["passed"] else f"FAIL at {summary['first_failure']}"))
    return "\n".join(lines) + "\n"
