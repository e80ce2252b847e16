"""Acceptance criteria 1 to 8, each at its stated tolerance.

One line per criterion is printed in the terminal summary (see conftest).
"""

import json
import subprocess
import sys
import time
from fractions import Fraction

import mpmath

from lieze import poly as PL
from lieze.expr import to_poly
from lieze.fuzz import PROPERTIES, run_suite
from lieze.reduction import ChangeOfVariables, consistency_check, equations_proportional, reduce_by, second_stage_reduce
from lieze.report import fields_of, reference_table
from lieze.selftest import data_path
from lieze.symmetry import (Ansatz, VectorField, commutator_table, determining_system, jacobi_holds,
                            solve_nullspace, span_equal)
from lieze.verify import GroupAction, on_manifold_residuals, residual, residual_at, solution_poly, transform_solution

from conftest import P

RESULTS = {}
LEADING = PL.jet("u", ("t", "t", "x", "y"))
XYT = ("x", "y", "t")


def record(n, name, ok, detail):
    RESULTS[n] = (name, ok, detail)
    assert ok, detail


def test_criterion_1_symmetry_recovery(delta):
    t0 = time.perf_counter()
    gens = solve_nullspace(determining_system(delta, Ansatz(2, 1), LEADING, XYT, "u"))
    elapsed = time.perf_counter() - t0
    paper = [VectorField(XYT, "u", tuple(P(c) for c in comps)) for comps in
             [("0", "2*y", "0", "-u"), ("0", "1", "0", "0"), ("2*x", "0", "2*t", "-u"),
              ("0", "0", "1", "0"), ("1", "0", "0", "0")]]
    ok = len(gens) == 5 and span_equal(gens, paper) and elapsed < 120
    record(1, "symmetry recovery", ok, f"dimension {len(gens)}, span equal {span_equal(gens, paper)}")


def _table_matches(loaded):
    spec = loaded.spec
    basis = fields_of(spec)
    table = commutator_table(basis)
    ref = reference_table(spec, table.labels)
    n = len(basis)
    bad = [f"[{table.labels[i]},{table.labels[j]}]" for i in range(n) for j in range(n)
           if table.entries[i][j] != ref[i][j]]
    return n * n - len(bad), n * n, bad, table.antisymmetric() and jacobi_holds(basis)


def test_criterion_2_commutator_tables(zoomeron, reduced_algebra):
    m1, n1, bad1, lie1 = _table_matches(zoomeron)
    m2, n2, bad2, lie2 = _table_matches(reduced_algebra)
    ok = m1 == n1 == 25 and m2 == n2 == 16 and lie1 and lie2
    record(2, "commutator tables", ok,
           f"first table {m1}/{n1} (mismatch {', '.join(bad1) or 'none'}), second table {m2}/{n2}, "
           f"antisymmetry and Jacobi {lie1 and lie2}")


def test_criterion_3_on_manifold_invariance(zoomeron, delta):
    worst = {}
    for f in fields_of(zoomeron.spec):
        r = on_manifold_residuals(delta, f, LEADING, 5, seed=101, points=20)
        assert len(r) >= 20
        worst[f.name] = max(r)
    ok = len(worst) == 5 and max(worst.values()) <= 1e-8
    record(3, "on-manifold invariance", ok, f"max normalized residual {max(worst.values()):.1e}")


def test_criterion_4_reduction_consistency(zoomeron, delta):
    lines = []
    ok = True
    for name, block in zoomeron.spec.substitutions.items():
        cov = ChangeOfVariables.from_block(block)
        re = reduce_by(delta, cov)
        s1 = consistency_check(delta, cov, re, seed=201, points=20, tol=1e-9)
        v1 = equations_proportional(re.expression, cov.reference, seed=202)
        re2 = second_stage_reduce(re, cov.stage2)
        s2 = consistency_check(re.expression, cov.stage2, re2, seed=203, points=20, tol=1e-9)
        v2 = equations_proportional(re2.expression, cov.stage2.reference, seed=204)
        for s in (s1, s2):
            ok = ok and s.points >= 20 and s.max_rel_error <= 1e-9
        lines.append(f"{name}: {v1.label}; stage2: {v2.label}")
    record(4, "reduction consistency", ok and len(lines) == 6, "; ".join(lines))


def test_criterion_5_solution_verification(zoomeron, delta):
    spec = zoomeron.spec
    lemma = all(any(at[0] == "j" and "x" in at[2] for at, _ in m) for m in delta.terms)
    exact = {}
    for name in ("eq216", "sec32"):
        r = residual(delta, spec.solutions[name], XYT, "u", spec.settings, constants=spec.constants)
        exact[name] = r.symbolic_zero and r.max_abs == 0 and r.passed
    oracle = json.loads(data_path("oracle_sec33b.json").read_text())
    assert len(oracle["points"]) >= 5 and oracle["digits"] >= 50
    u = solution_poly(spec.solutions["sec33b"])
    tol = Fraction(oracle["tolerance"])
    passes = True
    with mpmath.workdps(60):
        for e in oracle["points"]:
            r, scale = residual_at(delta, u, "u", e["point"], dps=60)
            assert abs(r - mpmath.mpf(e["residual"])) <= mpmath.mpf(10) ** -45
            passes = passes and abs(r / scale) <= mpmath.mpf(tol.numerator) / tol.denominator
    verdict = "PASS" if passes else "FAIL"
    ok = lemma and all(exact.values()) and verdict == oracle["verdict"]
    record(5, "solution verification", ok,
           f"x-derivative lemma {lemma}, exact zero {exact}, sec33b {verdict} vs oracle {oracle['verdict']}")


def test_criterion_6_symmetry_maps_solutions(zoomeron, delta):
    spec = zoomeron.spec
    passing = [n for n, s in spec.solutions.items() if s.expression is not None
               and residual(delta, s, XYT, "u", spec.settings, constants=spec.constants).passed]
    checks = failed = 0
    for n in passing:
        for f in fields_of(spec):
            for eps in (Fraction(1, 2), Fraction(-1, 2), Fraction(1), Fraction(-1)):
                new, u = transform_solution(spec.solutions[n], GroupAction(f, eps))
                r = residual(delta, new, XYT, "u", spec.settings, u=u, constants=spec.constants)
                checks += 1
                failed += not r.passed
    record(6, "symmetry maps solutions", checks >= 20 and failed == 0,
           f"{checks} transformed checks, {failed} failed, solutions {passing}")


def test_criterion_7_property_suites():
    res = {n: run_suite(n, 500, 42) for n in PROPERTIES}
    ok = len(res) == 6 and all(r.cases >= 500 and r.passed for r in res.values())
    record(7, "property suites", ok, ", ".join(f"{n} {r.cases - len(r.failures)}/{r.cases}" for n, r in res.items()))


def test_criterion_8_determinism():
    cmd = [sys.executable, "-m", "lieze.cli", "selftest", "--json"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode in (0, 1) and b.returncode == a.returncode
    summary = json.loads(a.stdout)
    assert [c["id"] for c in summary["criteria"]] == list(range(1, 9))
    assert all(isinstance(c["passed"], bool) for c in summary["criteria"])
    record(8, "determinism", a.stdout == b.stdout and len(a.stdout) > 0,
           f"two selftest --json runs, {len(a.stdout)} bytes, identical {a.stdout == b.stdout}")
