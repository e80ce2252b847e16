from fractions import Fraction

import pytest

from lieze.expr import Jet, Mul, Pow, Symbol, to_poly, to_text
from lieze.parser import (LieSyntaxError, Scope, UnknownSymbol, UnsupportedFunction, ValidationError,
                          parse_expression, parse_problem)

ZSCOPE = Scope(symbols=frozenset({"x", "y", "t"}), functions={"u": ("x", "y", "t")})

MINIMAL = """independent x y t
dependent u
equation D(u,x,t) + u*D(u,x)
leading D(u,x,t)
"""


def test_product_with_jet():
    e = parse_expression("4*u^5*D(u,x,t)", ZSCOPE)
    assert isinstance(e, Mul)
    assert to_poly(e) == to_poly(parse_expression("4*D(u,t,x)*u^5", ZSCOPE))
    assert Jet("u", ("x", "t")) in e.factors


def test_mixed_partials_parse_identically():
    assert parse_expression("D(u,x,y)", ZSCOPE) == parse_expression("D(u,y,x)", ZSCOPE)


def test_fractional_power():
    assert parse_expression("x^(1/2)", ZSCOPE) == Pow(Symbol("x"), Fraction(1, 2))


def test_precedence_and_unary_minus():
    assert to_poly(parse_expression("-x^2", ZSCOPE)) == to_poly(parse_expression("-(x^2)", ZSCOPE))
    assert to_poly(parse_expression("2^3^2", ZSCOPE)) == to_poly(parse_expression("2^9", ZSCOPE))
    assert to_poly(parse_expression("x - y - t", ZSCOPE)) == to_poly(parse_expression("x - (y + t)", ZSCOPE))
    assert to_poly(parse_expression("x/y/t", ZSCOPE)) == to_poly(parse_expression("x/(y*t)", ZSCOPE))


def test_sqrt_is_a_half_power():
    assert to_poly(parse_expression("sqrt(x)", ZSCOPE)) == to_poly(parse_expression("x^(1/2)", ZSCOPE))


def test_error_location():
    with pytest.raises(LieSyntaxError) as exc:
        parse_expression("x + * y", ZSCOPE)
    assert exc.value.lineno == 1 and exc.value.offset == 5


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol) as exc:
        parse_expression("x + q", ZSCOPE)
    assert exc.value.name == "q"


def test_unsupported_function():
    with pytest.raises(UnsupportedFunction):
        parse_expression("Ai(x)", ZSCOPE)


def test_non_rational_exponent_rejected():
    with pytest.raises(LieSyntaxError):
        parse_expression("x^y", ZSCOPE)


def test_bundled_problem(zoomeron):
    spec = zoomeron.spec
    assert spec.independent == ("x", "y", "t")
    assert spec.dependent == "u"
    assert spec.leading == Jet("u", ("x", "y", "t", "t"))
    assert spec.ansatz == (2, 1)
    assert set(spec.fields) == {"V1", "V2", "V3", "V4", "V5"}
    assert set(spec.substitutions) == {"V1", "GV2mBV5", "V3", "V4", "V2aV4", "V4V5"}
    assert spec.settings.seed == 42 and spec.settings.points == 20 and spec.settings.exclude == ("u=0",)
    lhs = to_poly(parse_expression(
        "4*u^5*D(u,x,t) + 4*u^4*D(u,x)*D(u,t) + u^3*(D(u,x,y,t,t) - D(u,x,x,x,y))"
        " + u^2*(2*D(u,x)*D(u,x,x,y) + D(u,x,x)*D(u,x,y) - 2*D(u,t)*D(u,x,y,t) - D(u,t,t)*D(u,x,y))"
        " + 2*u*D(u,t)^2*D(u,x,y) - 2*u*D(u,x)^2*D(u,x,y)", ZSCOPE))
    assert to_poly(spec.equation) == lhs


def test_unsupported_solution_is_kept(zoomeron):
    sol = zoomeron.spec.solutions["sec32_airy"]
    assert sol.expression is None and sol.unsupported == "Ai"


def test_bindings_recorded(zoomeron):
    assert zoomeron.spec.solutions["eq216"].bindings == {"C0": 3, "a1": 1, "a3": 2}
    assert zoomeron.spec.substitutions["V4V5"].stage2.bindings == {"a1": 2, "a3": 1}


def test_ansatz_directive():
    spec = parse_problem(MINIMAL + "ansatz indep_degree=1 dep_degree=2\n")
    assert spec.ansatz == (1, 2)


def test_empty_equation():
    with pytest.raises((ValidationError, LieSyntaxError)):
        parse_problem("independent x\ndependent u\nequation\nleading D(u,x)\n")


def test_missing_equation():
    with pytest.raises(ValidationError):
        parse_problem("independent x\ndependent u\n")


def test_leading_must_occur():
    with pytest.raises(ValidationError):
        parse_problem(MINIMAL.replace("leading D(u,x,t)", "leading D(u,y,y)"))


def test_reserved_and_duplicate_names():
    with pytest.raises((ValidationError, LieSyntaxError)):
        parse_problem(MINIMAL + "constant exp\n")
    with pytest.raises((ValidationError, LieSyntaxError)):
        parse_problem(MINIMAL + "constant x\n")


def test_line_continuation_and_comments():
    spec = parse_problem("independent x t  # coordinates\ndependent u\n"
                         "equation D(u,x,t) \\\n  + u*D(u,x)\nleading D(u,x,t)\n")
    assert to_poly(spec.equation) == to_poly(parse_expression("D(u,x,t) + u*D(u,x)", ZSCOPE))


def test_syntax_error_reports_file_line():
    with pytest.raises(LieSyntaxError) as exc:
        parse_problem(MINIMAL + "field A { x = 1 +; }\n")
    assert exc.value.lineno == 5


def test_settings_directive():
    spec = parse_problem(MINIMAL + 'settings seed=7 tol=1e-6 points=5 exclude "u=0"\n')
    s = spec.settings
    assert (s.seed, s.tol, s.points, s.exclude) == (7, 1e-6, 5, ("u=0",))
