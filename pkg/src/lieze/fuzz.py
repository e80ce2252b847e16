"""Seeded random generators and property checks.

Shared by the test suite and ``lieze selftest``.  The tree evaluator and the
Gauss-Jordan routine here are deliberately naive: they are oracles for the
normal form and for :mod:`lieze.linalg`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath

from . import linalg
from . import poly as P
from .expr import Add, Const, Exp, Expr, Jet, Mul, Pow, Symbol, from_poly, to_poly, to_text
from .parser import Scope, parse_expression
from .poly import DomainError, Poly

SYMBOLS = ("x", "y", "z")
EXPONENTS = (Fraction(2), Fraction(3), Fraction(-1), Fraction(-2), Fraction(1, 2), Fraction(1, 3),
             Fraction(-1, 2), Fraction(3, 2))


def random_rational(rng: random.Random, span: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-span * den, span * den), rng.randint(1, den))


def random_expr(rng: random.Random, depth: int = 8, symbols: Sequence[str] = SYMBOLS,
                jets: Sequence[Tuple[str, Tuple[str, ...]]] = (), budget: Optional[List[int]] = None) -> Expr:
    """Random tree of depth <= ``depth``; ``budget`` caps the node count."""
    if budget is None:
        budget = [24]
    budget[0] -= 1
    if depth <= 0 or budget[0] <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.3:
            return Const(random_rational(rng))
        if jets and r < 0.6:
            dep, idx = rng.choice(list(jets))
            return Jet(dep, idx)
        return Symbol(rng.choice(list(symbols)))
    op = rng.random()
    sub = lambda: random_expr(rng, depth - 1, symbols, jets, budget)  # noqa: E731
    if op < 0.35:
        return Add(tuple(sub() for _ in range(rng.randint(2, 3))))
    if op < 0.7:
        return Mul(tuple(sub() for _ in range(rng.randint(2, 3))))
    if op < 0.9:
        return Pow(sub(), rng.choice(EXPONENTS))
    if op < 0.95:
        return Mul((Const(-1), sub()))
    return Exp(Mul((Const(Fraction(1, rng.randint(2, 5))), sub())))


def random_point(rng: random.Random, atoms) -> Dict[tuple, Fraction]:
    return {a: Fraction(rng.randint(5, 20), rng.randint(4, 9)) for a in sorted(atoms)}


def _tree_atoms(e: Expr, out: set) -> set:
    if isinstance(e, Symbol):
        out.add(("s", e.name))
    elif isinstance(e, Jet):
        out.add(("j", e.dep, e.index))
    elif isinstance(e, (Add, Mul)):
        for c in (e.terms if isinstance(e, Add) else e.factors):
            _tree_atoms(c, out)
    elif isinstance(e, Pow):
        _tree_atoms(e.base, out)
    elif isinstance(e, Exp):
        _tree_atoms(e.arg, out)
    return out


def tree_atoms(e: Expr) -> set:
    return _tree_atoms(e, set())


EXP_LIMIT = 1000


def eval_tree(e: Expr, values: Dict[tuple, object]):
    """Direct recursive evaluation in mpmath, real principal branch."""
    if isinstance(e, Const):
        return mpmath.mpf(e.value.numerator) / e.value.denominator
    if isinstance(e, Symbol):
        v = values[("s", e.name)]
        return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)
    if isinstance(e, Jet):
        v = values[("j", e.dep, e.index)]
        return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)
    if isinstance(e, Add):
        return mpmath.fsum(eval_tree(t, values) for t in e.terms)
    if isinstance(e, Mul):
        out = mpmath.mpf(1)
        for f in e.factors:
            out *= eval_tree(f, values)
        return out
    if isinstance(e, Pow):
        b = eval_tree(e.base, values)
        r = e.exp
        if b == 0 and r < 0:
            raise DomainError("division by zero")
        if r.denominator == 1:
            return b ** int(r)
        if b < 0:
            if r.denominator % 2 == 0:
                raise DomainError("even root of a negative")
            root = -mpmath.root(-b, r.denominator)
        else:
            root = mpmath.root(b, r.denominator)
        return root ** r.numerator
    if isinstance(e, Exp):
        a = eval_tree(e.arg, values)
        if abs(a) > EXP_LIMIT:
            # beyond this the working precision cannot separate two correct evaluations
            raise DomainError("exp argument out of the well-conditioned range")
        return mpmath.exp(a)
    raise TypeError(e)


# ---------------------------------------------------------------------------
# naive oracle for linear algebra
# ---------------------------------------------------------------------------

def naive_rref(matrix: Sequence[Sequence]) -> Tuple[List[List[Fraction]], List[int]]:
    """Textbook Gauss-Jordan over Fractions (nonzero rows, pivot columns)."""
    a = [[Fraction(v) for v in row] for row in matrix]
    if not a:
        return [], []
    m, n = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        lead = a[r][c]
        a[r] = [v / lead for v in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a[:r], pivots


def random_matrix(rng: random.Random) -> List[List[Fraction]]:
    m, n = rng.randint(1, 6), rng.randint(1, 7)
    rows = []
    for _ in range(m):
        r = rng.random()
        if rows and r < 0.15:
            k = random_rational(rng, 3, 3)
            rows.append([k * v for v in rng.choice(rows)])
        elif r < 0.25:
            rows.append([Fraction(0)] * n)
        else:
            rows.append([random_rational(rng, 4, 5) if rng.random() < 0.7 else Fraction(0) for _ in range(n)])
    return rows


# ---------------------------------------------------------------------------
# properties; each returns None on success, "skip" when undefined, or a message
# ---------------------------------------------------------------------------

def prop_idempotent(rng: random.Random):
    e = random_expr(rng)
    try:
        n1 = from_poly(to_poly(e))
        n2 = from_poly(to_poly(n1))
    except DomainError:
        return "skip"
    return None if n1 == n2 else f"normalize not idempotent on {to_text(e)}"


def prop_eval_consistent(rng: random.Random):
    e = random_expr(rng)
    try:
        p = to_poly(e)
    except DomainError:
        return "skip"
    pt = random_point(rng, tree_atoms(e))
    with mpmath.workdps(40):
        try:
            a = eval_tree(e, pt)
        except (DomainError, ZeroDivisionError):
            return "skip"
        try:
            b = P.evaluate(p, pt, "mp")
        except DomainError:
            return f"normal form undefined where the tree is defined: {to_text(e)}"
        if abs(a - b) > mpmath.mpf("1e-9") * (1 + abs(a)):
            return f"value changed by normalization: {to_text(e)} ({a} vs {b})"
    return None


def prop_product_rule(rng: random.Random):
    f, g = random_expr(rng, 4), random_expr(rng, 4)
    s = ("s", rng.choice(SYMBOLS))
    try:
        fp, gp = to_poly(f), to_poly(g)
        lhs = P.diff(fp * gp, s)
        rhs = P.diff(fp, s) * gp + fp * P.diff(gp, s)
    except DomainError:
        return "skip"
    return None if lhs == rhs else f"product rule fails for {to_text(f)} * {to_text(g)}"


JETS2 = tuple(("u", idx) for idx in [(), ("x",), ("y",), ("x", "x"), ("x", "y"), ("y", "y")])


def prop_total_commute(rng: random.Random):
    e = random_expr(rng, 5, ("x", "y"), JETS2)
    try:
        p = to_poly(e)
    except DomainError:
        return "skip"
    a = P.total_derivative(P.total_derivative(p, "x"), "y")
    b = P.total_derivative(P.total_derivative(p, "y"), "x")
    return None if a == b else f"D_x D_y != D_y D_x on {to_text(e)}"


def prop_round_trip(rng: random.Random):
    e = random_expr(rng, jets=JETS2)
    scope = Scope(symbols=None, functions={"u": None})
    try:
        p = to_poly(e)
    except DomainError:
        return "skip"
    back = to_poly(parse_expression(to_text(e), scope))
    if back != p:
        return f"print/parse changed {to_text(e)}"
    again = to_poly(parse_expression(to_text(from_poly(p)), scope))
    return None if again == p else f"normal form does not re-parse: {to_text(p)}"


def prop_nullspace(rng: random.Random):
    m = random_matrix(rng)
    n = len(m[0])
    R, piv = linalg.rref(m, n)
    R0, piv0 = naive_rref(m)
    if (R, piv) != (R0, piv0):
        return f"rref disagrees with the oracle on {m}"
    basis = linalg.nullspace(m, n)
    if len(basis) != n - len(piv0):
        return "nullspace dimension is wrong"
    for v in basis:
        if any(sum(a * b for a, b in zip(row, v)) != 0 for row in m):
            return "nullspace vector does not annihilate the matrix"
        if next(x for x in v if x != 0) != 1:
            return "nullspace vector not normalized"
    return None


@dataclass
class SuiteResult:
    name: str
    cases: int
    skipped: int
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures and self.cases - self.skipped > 0


PROPERTIES: Dict[str, Callable] = {
    "normalize_idempotent": prop_idempotent,
    "normalize_eval_consistent": prop_eval_consistent,
    "product_rule": prop_product_rule,
    "total_derivative_commute": prop_total_commute,
    "print_parse_round_trip": prop_round_trip,
    "nullspace_vs_bruteforce_rref": prop_nullspace,
}


def run_suite(name: str, cases: int = 500, seed: int = 42) -> SuiteResult:
    rng = random.Random(f"{seed}:{name}")
    prop = PROPERTIES[name]
    skipped = 0
    failures = []
    for _ in range(cases):
        r = prop(rng)
        if r == "skip":
            skipped += 1
        elif r:
            failures.append(r)
    return SuiteResult(name, cases, skipped, failures)
