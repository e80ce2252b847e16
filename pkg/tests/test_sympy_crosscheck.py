"""Independent checks against sympy (test-only dependency)."""

import random
import re
from fractions import Fraction

import pytest

sympy = pytest.importorskip("sympy")

from lieze import poly as PL  # noqa: E402
from lieze.expr import to_poly, to_text  # noqa: E402
from lieze.fuzz import random_expr, random_point, tree_atoms  # noqa: E402
from lieze.poly import DomainError  # noqa: E402
from lieze.verify import solution_poly  # noqa: E402

X, Y, Z = sympy.symbols("x y z", positive=True)
NS = {"x": X, "y": Y, "z": Z, "exp": sympy.exp}


def to_sympy(text):
    return sympy.sympify(text.replace("^", "**"), locals=NS)


def test_partial_derivatives_agree():
    rng = random.Random(7)
    checked = 0
    while checked < 60:
        e = random_expr(rng, 5)
        try:
            p = to_poly(e)
            dp = PL.diff(p, ("s", "x"))
        except DomainError:
            continue
        ref = sympy.diff(to_sympy(to_text(e)), X)
        pt = random_point(rng, tree_atoms(e) | {("s", "x"), ("s", "y"), ("s", "z")})
        subs = {s: sympy.Rational(pt[("s", s.name)].numerator, pt[("s", s.name)].denominator) for s in (X, Y, Z)}
        try:
            want = complex(ref.evalf(30, subs=subs))
            got = float(PL.evaluate(dp, pt, "float"))
        except (DomainError, ZeroDivisionError, TypeError, ValueError):
            continue
        if abs(want.imag) > 1e-12:
            continue
        assert abs(got - want.real) <= 1e-7 * (1 + abs(want.real))
        checked += 1


def test_zoomeron_residual_of_sec33b(zoomeron, delta):
    u = solution_poly(zoomeron.spec.solutions["sec33b"])
    x, y, t = sympy.symbols("x y t", positive=True)
    us = sympy.sqrt(t / (6 * x**2 * (2 * y + 1)))
    d = lambda *v: sympy.diff(us, *v)  # noqa: E731
    lhs = (4 * us**5 * d(x, t) + 4 * us**4 * d(x) * d(t) + us**3 * (d(x, y, t, t) - d(x, x, x, y))
           + us**2 * (2 * d(x) * d(x, x, y) + d(x, x) * d(x, y) - 2 * d(t) * d(x, y, t) - d(t, t) * d(x, y))
           + 2 * us * d(t)**2 * d(x, y) - 2 * us * d(x)**2 * d(x, y))
    pt = {x: sympy.Rational(3, 2), y: 2, t: sympy.Rational(7, 3)}
    want = sympy.N(lhs.subs(pt), 40)
    from lieze.verify import residual_at

    got, _ = residual_at(delta, u, "u", {"x": Fraction(3, 2), "y": 2, "t": Fraction(7, 3)})
    assert abs(float(got) - float(want)) <= 1e-25 * max(1, abs(float(want)))
