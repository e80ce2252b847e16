"""Residual verification of closed-form solutions and exact group flows."""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from . import poly as P
from .parser import CandidateSolution, Scope, parse_expression
from .poly import DomainError, Poly, sym
from .symmetry import VectorField, apply_prolonged, prolong, split_leading


class EmptySampleRegion(RuntimeError):
    pass


class UnsupportedGenerator(ValueError):
    pass


def _rand_rational(rng: random.Random, lo, hi) -> Fraction:
    # rationals with small denominators, strictly inside the box
    den = rng.choice((2, 3, 4, 5, 7, 8, 9, 11))
    lo, hi = Fraction(lo), Fraction(hi)
    k = rng.randint(1, int((hi - lo) * den) - 1) if (hi - lo) * den > 1 else 0
    return lo + Fraction(k, den) if k else (lo + hi) / 2


@dataclass
class ResidualReport:
    name: str
    points: List[Dict[str, str]]
    residuals: List[str]
    normalized: List[float]
    scales: List[str]
    max_abs: float
    median_abs: float
    max_normalized: float
    tol: float
    seed: int
    exact: bool
    symbolic_zero: bool
    excluded: int
    mode: str
    status: str = ""

    @property
    def passed(self) -> bool:
        return self.max_normalized <= self.tol

    @property
    def verdict(self) -> str:
        if self.status:
            return self.status
        if not self.passed:
            return "FAIL"
        return "PASS (exact)" if self.exact else "PASS"


def solution_poly(sol: CandidateSolution) -> Poly:
    from .expr import to_poly

    if sol.expression is None:
        from .parser import UnsupportedFunction

        raise UnsupportedFunction(sol.unsupported or "?")
    p = to_poly(sol.expression)
    if sol.bindings:
        p = P.subs(p, {sym(k): Poly.const(v) for k, v in sol.bindings.items()})
    return p


class JetTable:
    """Partial derivatives of a closed-form ``u`` with memoisation."""

    def __init__(self, u: Poly):
        self._d: Dict[tuple, Poly] = {(): u}

    def __call__(self, index) -> Poly:
        index = tuple(sorted(index))
        if index not in self._d:
            self._d[index] = P.diff(self(index[:-1]), sym(index[-1]))
        return self._d[index]


def exclusion_polys(exclude: Sequence[str], independent, dependent, constants, u: Poly) -> List[Poly]:
    """Each ``lhs=rhs`` predicate becomes ``lhs-rhs`` with ``u`` replaced by the solution."""
    from .expr import to_poly

    out = []
    sc = Scope(symbols=frozenset(independent) | frozenset(constants), functions={dependent: None})
    for text in exclude:
        lhs, _, rhs = text.partition("=")
        e = to_poly(parse_expression(lhs, sc)) - (to_poly(parse_expression(rhs, sc)) if rhs.strip() else Poly())
        out.append(P.subs(e, {P.jet(dependent): u}))
    return out


def _num_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(v, 20, min_fixed=-3, max_fixed=3)


def _point_residual(delta, needed, jet_map, pt):
    """(residual, term values, exact?) at one point; exact rationals when possible."""
    vals = dict(pt)
    exact = True
    for a in needed:
        v = P.evaluate(jet_map[a], pt, "exact")
        if not isinstance(v, (int, Fraction)):
            exact = False
            break
        vals[a] = Fraction(v)
    if not exact:
        vals = dict(pt)
        for a in needed:
            vals[a] = P.evaluate(jet_map[a], pt, "mp")
    mode = "exact" if exact else "mp"
    return P.evaluate(delta, vals, mode), P.term_values(delta, vals, mode), exact


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def residual_at(delta: Poly, u: Poly, dependent: str, point: Dict[str, object], dps: int = 50):
    """Residual and its normalisation scale at one fixed point (``dps`` digits)."""
    jets = JetTable(u)
    needed = sorted((a for a in delta.jets() if a[1] == dependent), key=lambda a: (len(a[2]), a[2]))
    jet_map = {a: jets(a[2]) for a in needed}
    pt = {sym(k): Fraction(v) for k, v in point.items()}
    with mpmath.workdps(dps):
        r, terms, _ = _point_residual(delta, needed, jet_map, pt)
        return _mpf(r), _mpf(max(abs(t) for t in terms))


def residual(delta: Poly, sol: CandidateSolution, independent: Sequence[str], dependent: str,
             settings, seed: Optional[int] = None, u: Optional[Poly] = None,
             constants: Sequence[str] = (), dps: int = 50) -> ResidualReport:
    """Substitute ``sol`` and its derivatives into ``delta`` and sample the residual.

    Unbound constants are sampled from the box along with the coordinates.
    """
    seed = settings.seed if seed is None else seed
    rng = random.Random(seed)
    if u is None:
        u = solution_poly(sol)
    jets = JetTable(u)
    needed = sorted((a for a in delta.jets() if a[1] == dependent), key=lambda a: (len(a[2]), a[2]))
    jet_map = {a: jets(a[2]) for a in needed}
    symbolic = P.subs(delta, jet_map)
    excl = exclusion_polys(settings.exclude, independent, dependent, constants, u)
    names = sorted({a[1] for p in [u] + list(jet_map.values()) for a in p.symbols()} | set(independent))
    pts, res, norm, scales = [], [], [], []
    exact_all = True
    zero_all = True
    excluded = 0
    tries = 0
    with mpmath.workdps(dps):
        while len(pts) < settings.points:
            tries += 1
            if tries > 10 * settings.points + 20:
                raise EmptySampleRegion(f"no admissible sample points for {sol.name}")
            pt = {sym(n): _rand_rational(rng, *settings.box) for n in names}
            try:
                if any(P.evaluate(e, pt, "mp") == 0 for e in excl):
                    excluded += 1
                    continue
                r, terms, exact = _point_residual(delta, needed, jet_map, pt)
            except DomainError:
                excluded += 1
                continue
            exact_all = exact_all and exact
            scale = max((abs(t) for t in terms), default=0)
            if scale == 0:
                n = 0.0 if r == 0 else float("inf")
            else:
                n = float(abs(r) / scale)
            pts.append({k[1]: str(v) for k, v in sorted(pt.items())})
            res.append(_num_str(r))
            scales.append(_num_str(scale))
            norm.append(n)
            zero_all = zero_all and exact and r == 0
    abs_res = [abs(float(mpmath.mpf(x) if "/" not in x else Fraction(x))) for x in res]
    return ResidualReport(
        name=sol.name, points=pts, residuals=res, normalized=norm, scales=scales,
        max_abs=max(abs_res), median_abs=statistics.median(abs_res), max_normalized=max(norm),
        tol=settings.tol, seed=seed, exact=symbolic.is_zero() or zero_all,
        symbolic_zero=symbolic.is_zero(), excluded=excluded, mode="exact" if exact_all else f"mp{dps}")


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def fd_check(e: Poly, s: str, point: Dict[str, object], h=None, dps: int = 40) -> float:
    """Relative error between the symbolic partial and a Richardson-extrapolated central difference."""
    at = sym(s)
    with mpmath.workdps(dps):
        vals = {sym(k) if isinstance(k, str) else k: mpmath.mpf(v.numerator) / v.denominator
                if isinstance(v, Fraction) else mpmath.mpf(v) for k, v in point.items()}
        x0 = vals[at]
        if h is None:
            h = mpmath.mpf("1e-4") * max(1, abs(x0))

        def f(x):
            return P.evaluate(e, {**vals, at: x}, "mp")

        def central(hh):
            return (f(x0 + hh) - f(x0 - hh)) / (2 * hh)

        approx = (4 * central(h / 2) - central(h)) / 3
        exact = P.evaluate(P.diff(e, at), vals, "mp")
        denom = max(abs(exact), mpmath.mpf(1))
        return float(abs(approx - exact) / denom)


# ---------------------------------------------------------------------------
# group flows
# ---------------------------------------------------------------------------

@dataclass
class GroupAction:
    """``exp(eps * field)`` for fields whose components are affine in their own coordinate."""

    field: VectorField
    eps: Fraction

    def coefficients(self) -> List[Tuple[Fraction, Fraction]]:
        out = []
        for name, c in zip(self.field.variables + (self.field.dependent,), self.field.coeffs):
            at = P.jet(self.field.dependent) if name == self.field.dependent else sym(name)
            if any(a != at for a in c.atoms()):
                raise UnsupportedGenerator(f"{self.field.name or 'field'}: component for {name} is not "
                                           "affine in its own coordinate")
            a1 = c.coeff_of(at, 1)
            a0 = c.coeff_of(at, 0)
            if c.degree_in(at) > 1 or not a1.is_const() or not a0.is_const():
                raise UnsupportedGenerator(f"{self.field.name or 'field'}: no closed-form flow")
            out.append((Fraction(a1.const_value()), Fraction(a0.const_value())))
        return out

    def flow(self, z: Poly, a: Fraction, b: Fraction, eps: Fraction) -> Poly:
        """Solution of dz/de = a z + b at parameter ``eps``."""
        if a == 0:
            return z + Poly.const(b * eps)
        g = P.exp(Poly.const(a * eps))
        return z * g + (g - Poly.const(1)).scale(b / a)


def transform_solution(sol: CandidateSolution, action: GroupAction, u: Optional[Poly] = None) -> Tuple[CandidateSolution, Poly]:
    """``u*(x) = Phi_u(eps, u(Phi_x(-eps, x)))`` for the exact flow ``Phi``."""
    from .expr import from_poly

    if u is None:
        u = solution_poly(sol)
    coeffs = action.coefficients()
    fv = action.field
    eps = Fraction(action.eps)
    back = {}
    for name, (a, b) in zip(fv.variables, coeffs):
        back[sym(name)] = action.flow(Poly.symbol(name), a, b, -eps)
    moved = P.subs(u, back)
    a, b = coeffs[-1]
    out = action.flow(moved, a, b, eps)
    name = f"{sol.name}*{fv.name or 'V'}({eps})"
    return CandidateSolution(name, from_poly(out), {}, None, ""), out


# ---------------------------------------------------------------------------
# invariance on the solution manifold
# ---------------------------------------------------------------------------

def on_manifold_residuals(delta: Poly, fv: VectorField, leading: tuple, order: int,
                          seed: int, points: int = 20) -> List[float]:
    """|Pr(V)(delta)| / (1 + largest term) at random jet points with delta = 0.

    The leading coordinate is solved from ``delta = 0``; everything else is
    random in [1, 3].
    """
    rng = random.Random(seed)
    kappa, rest = split_leading(delta, leading)
    pv = prolong(fv, order)
    image = apply_prolonged(pv, delta)
    atoms = sorted((image.atoms() | delta.atoms()) - {leading})
    out = []
    tries = 0
    with mpmath.workdps(30):
        while len(out) < points:
            tries += 1
            if tries > 20 * points:
                raise EmptySampleRegion("cannot place points on the solution manifold")
            vals = {a: _rand_rational(rng, 1, 3) * rng.choice((1, -1)) if a[0] == "j" and a[2] else
                    _rand_rational(rng, 1, 3) for a in atoms}
            k = P.evaluate(kappa, vals, "exact")
            if k == 0:
                continue
            vals[leading] = -Fraction(P.evaluate(rest, vals, "exact")) / Fraction(k)
            if P.evaluate(delta, vals, "exact") != 0:
                raise AssertionError("manifold point construction failed")
            r = P.evaluate(image, vals, "exact")
            terms = P.term_values(delta, vals, "exact")
            out.append(float(abs(Fraction(r)) / (1 + max(abs(Fraction(t)) for t in terms))))
    return out
