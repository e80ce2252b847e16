"""Immutable expression trees and the public symbolic operations.

Trees are what the parser produces and what reports print.  All algebra goes
through :mod:`lieze.poly`; ``normalize`` maps a tree to its expanded normal
form and back, so ``normalize(normalize(e)) == normalize(e)`` structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

from . import poly as P
from .poly import DomainError, JetOrderOverflow, NotPolynomial, Poly

__all__ = [
    "Expr", "Const", "Symbol", "Jet", "Add", "Mul", "Pow", "Exp",
    "DomainError", "JetOrderOverflow", "NotPolynomial",
    "to_poly", "from_poly", "normalize", "diff_partial", "total_derivative",
    "substitute", "eval_numeric", "collect_coefficients", "to_text",
]


class Expr:
    """Base class; arithmetic operators build (unsimplified) trees."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, _wrap(other)))

    def __radd__(self, other):
        return Add((_wrap(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(-1), _wrap(other)))))

    def __rsub__(self, other):
        return Add((_wrap(other), Mul((Const(-1), self))))

    def __mul__(self, other):
        return Mul((self, _wrap(other)))

    def __rmul__(self, other):
        return Mul((_wrap(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(_wrap(other), Fraction(-1))))

    def __rtruediv__(self, other):
        return Mul((_wrap(other), Pow(self, Fraction(-1))))

    def __neg__(self):
        return Mul((Const(-1), self))

    def __pow__(self, r):
        return Pow(self, Fraction(r))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Symbol(Expr):
    name: str


@dataclass(frozen=True)
class Jet(Expr):
    """Derivative of dependent variable ``dep`` along the multiset ``index``."""

    dep: str
    index: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(sorted(self.index)))

    @property
    def order(self) -> int:
        return len(self.index)


@dataclass(frozen=True)
class Add(Expr):
    terms: Tuple[Expr, ...]


@dataclass(frozen=True)
class Mul(Expr):
    factors: Tuple[Expr, ...]


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exp", Fraction(self.exp))


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(Fraction(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


# ---------------------------------------------------------------------------
# tree <-> normal form
# ---------------------------------------------------------------------------

def to_poly(e: Union[Expr, Poly]) -> Poly:
    if isinstance(e, Poly):
        return e
    if isinstance(e, Const):
        return Poly.const(e.value)
    if isinstance(e, Symbol):
        return Poly.symbol(e.name)
    if isinstance(e, Jet):
        return Poly.jet(e.dep, e.index)
    if isinstance(e, Add):
        out = Poly()
        for t in e.terms:
            out = out + to_poly(t)
        return out
    if isinstance(e, Mul):
        out = Poly.const(1)
        for f in e.factors:
            out = out * to_poly(f)
            if out.is_zero():
                break
        return out
    if isinstance(e, Pow):
        return to_poly(e.base).pow(e.exp)
    if isinstance(e, Exp):
        return P.exp(to_poly(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def _atom_tree(at) -> Expr:
    k = at[0]
    if k == "s":
        return Symbol(at[1])
    if k == "j":
        return Jet(at[1], at[2])
    if k == "c":
        return Const(at[1])
    if k == "p":
        return from_poly(Poly.from_key(at[1]))
    if k == "e":
        return Exp(from_poly(Poly.from_key(at[1])))
    raise ValueError(at)


def _term_sort_key(item):
    m, _ = item
    deg = P._mono_degree(m)
    return (-deg, m)


def from_poly(p: Poly) -> Expr:
    """Canonical tree of a normal form (deterministic term order)."""
    if p.is_zero():
        return Const(0)
    terms = []
    for m, c in sorted(p.terms.items(), key=_term_sort_key):
        factors = []
        if c != 1 or not m:
            factors.append(Const(c))
        for at, e in m:
            base = _atom_tree(at)
            factors.append(base if e == 1 and at[0] != "c" else Pow(base, e))
        terms.append(factors[0] if len(factors) == 1 else Mul(tuple(factors)))
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


# ---------------------------------------------------------------------------
# printing (plain text that re-parses)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _const_text(v: Fraction) -> Tuple[str, int]:
    if v.denominator == 1:
        return str(v.numerator), (_PREC_ATOM if v >= 0 else _PREC_NEG)
    return f"{v.numerator}/{v.denominator}", _PREC_MUL


def _exp_text(r: Fraction) -> str:
    if r.denominator == 1 and r >= 0:
        return str(r.numerator)
    if r.denominator == 1:
        return f"({r.numerator})"
    return f"({r.numerator}/{r.denominator})"


def _text(e: Expr) -> Tuple[str, int]:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Symbol):
        return e.name, _PREC_ATOM
    if isinstance(e, Jet):
        if not e.index:
            return e.dep, _PREC_ATOM
        return f"D({e.dep},{','.join(e.index)})", _PREC_ATOM
    if isinstance(e, Exp):
        return f"exp({_text(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Pow):
        s, pr = _text(e.base)
        # a negative literal base is parenthesized too: -2^2 parses as -(2^2)
        if pr <= _PREC_POW:
            s = f"({s})"
        return f"{s}^{_exp_text(e.exp)}", _PREC_POW
    if isinstance(e, Mul):
        parts = []
        factors = list(e.factors)
        neg = False
        if factors and isinstance(factors[0], Const) and factors[0].value == -1 and len(factors) > 1:
            neg = True
            factors = factors[1:]
        for i, f in enumerate(factors):
            s, pr = _text(f)
            if pr < _PREC_MUL or (pr == _PREC_MUL and i > 0) or (pr == _PREC_NEG and i > 0):
                s = f"({s})"
            parts.append(s)
        s = "*".join(parts)
        if neg:
            return "-" + s, _PREC_NEG
        return s, _PREC_MUL
    if isinstance(e, Add):
        out = ""
        for i, t in enumerate(e.terms):
            s, pr = _text(t)
            if i == 0:
                out = s if pr >= _PREC_NEG or pr == _PREC_MUL else f"({s})"
                continue
            if s.startswith("-") and pr in (_PREC_NEG, _PREC_MUL, _PREC_ATOM):
                out += " - " + s[1:]
            else:
                out += " + " + (s if pr > _PREC_ADD else f"({s})")
        return out, _PREC_ADD
    raise TypeError(e)


def to_text(e: Union[Expr, Poly]) -> str:
    if isinstance(e, Poly):
        e = from_poly(e)
    return _text(e)[0]


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _atom_of(s) -> tuple:
    if isinstance(s, Symbol):
        return ("s", s.name)
    if isinstance(s, Jet):
        return ("j", s.dep, s.index)
    if isinstance(s, str):
        return ("s", s)
    if isinstance(s, tuple):
        return s
    raise TypeError(f"not a symbol or jet coordinate: {s!r}")


def normalize(e: Union[Expr, Poly]) -> Expr:
    return from_poly(to_poly(e))


def diff_partial(e, s) -> Expr:
    """Partial derivative; jet coordinates are independent symbols here."""
    return from_poly(P.diff(to_poly(e), _atom_of(s)))


def total_derivative(e, var, max_order: int = None) -> Expr:
    name = var.name if isinstance(var, Symbol) else var
    return from_poly(P.total_derivative(to_poly(e), name, max_order))


def substitute(e, bindings: Mapping) -> Expr:
    """Simultaneous replacement followed by normalization."""
    mapping = {_atom_of(k): to_poly(_wrap(v) if not isinstance(v, Poly) else v)
               for k, v in bindings.items()}
    return from_poly(P.subs(to_poly(e), mapping))


def eval_numeric(e, point: Mapping, mode: str = "exact"):
    """Evaluate at ``point`` (keys: Symbol, Jet, names or atoms).

    ``mode='exact'`` returns a Fraction when every power resolves rationally
    and a float otherwise; ``mode='float'`` uses IEEE doubles.
    """
    values = {_atom_of(k): v for k, v in point.items()}
    return P.evaluate(to_poly(e), values, "exact" if mode in ("exact", "exact-rational") else mode)


def collect_coefficients(e, variables: Iterable) -> Dict[Expr, Expr]:
    """Map each monomial in ``variables`` to its coefficient expression."""
    atoms = [_atom_of(v) for v in variables]
    out = {}
    for mono, coeff in P.collect(to_poly(e), atoms).items():
        out[from_poly(Poly({mono: 1}))] = from_poly(coeff)
    return out
