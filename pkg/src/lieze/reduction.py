"""Similarity reduction by an explicit change of variables.

The old dependent variable is written as ``u = G(old vars, F)`` with
``F = F(new vars)`` and each new variable given as an expression in the old
ones.  Derivatives of ``u`` follow from the chain rule; the old variables are
then eliminated through an inverse map obtained by linear elimination, which
leaves the surplus old variables ("suppressed") as the only trace of the
original coordinates.  Whatever depends on them is pulled out as a monomial
factor; a quotient free of them is the reduced equation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from . import poly as P
from .linalg import rank
from .poly import DomainError, Poly, sym

SIGMA = "_sigma"


class ReductionError(ValueError):
    pass


class RankDeficient(ReductionError):
    pass


class DegenerateSample(ReductionError):
    pass


# ---------------------------------------------------------------------------
# change of variables
# ---------------------------------------------------------------------------

@dataclass
class ChangeOfVariables:
    """``u = form(old vars, F)``, ``F = F(new vars)``, ``new_i = definitions[i]``."""

    old_variables: Tuple[str, ...]
    old_dependent: str
    new_variables: Tuple[str, ...]
    definitions: Tuple[Poly, ...]
    new_dependent: str
    form: Poly
    name: str = ""
    reference: Optional[Poly] = None
    reference_text: str = ""
    stage2: Optional["ChangeOfVariables"] = None

    @classmethod
    def from_block(cls, block) -> "ChangeOfVariables":
        from .expr import to_poly

        defs = tuple(to_poly(d) for d in block.definitions)
        form = P.subs(to_poly(block.form), {sym(n): d for n, d in zip(block.new_variables, defs)})
        return cls(block.old_variables, block.old_dependent, block.new_variables, defs,
                   block.new_dependent, form, block.name,
                   to_poly(block.reference) if block.reference is not None else None,
                   block.reference_text,
                   cls.from_block(block.stage2) if block.stage2 is not None else None)

    @property
    def parameters(self) -> Tuple[str, ...]:
        names = set()
        for p in self.definitions + (self.form,):
            names |= {a[1] for a in p.symbols()}
        return tuple(sorted(names - set(self.old_variables)))


def _random_rational(rng: random.Random, lo, hi, den: int = 16) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    k = rng.randint(0, den)
    return lo + (hi - lo) * Fraction(k, den)


def _box_point(rng, names, box) -> Dict[tuple, Fraction]:
    # interior points only, a tiny offset keeps us off lattice coincidences
    return {sym(n): _random_rational(rng, box[0], box[1], 64) + Fraction(1, 997) for n in names}


def check_rank(cov: ChangeOfVariables, seed: int = 0, trials: int = 5,
               box=(Fraction(1), Fraction(3))) -> int:
    """Generic rank of the Jacobian d(new)/d(old), sampled at random points."""
    rng = random.Random(seed)
    jac = [[P.diff(d, sym(v)) for v in cov.old_variables] for d in cov.definitions]
    names = sorted({a[1] for row in jac for p in row for a in p.symbols()} | set(cov.old_variables))
    best = 0
    for _ in range(trials):
        pt = _box_point(rng, names, box)
        try:
            m = [[Fraction(P.evaluate(p, pt, "exact")) for p in row] for row in jac]
        except DomainError:
            continue
        best = max(best, rank(m, len(cov.old_variables)))
        if best == len(cov.definitions):
            break
    return best


class ChainRule:
    """Old-coordinate jets of ``u`` expressed through jets of ``F``."""

    def __init__(self, cov: ChangeOfVariables):
        self.cov = cov
        self.partials = {(n, v): P.diff(d, sym(v))
                         for n, d in zip(cov.new_variables, cov.definitions)
                         for v in cov.old_variables}
        self._cache: Dict[tuple, Poly] = {(): cov.form}
        self._rule_caches: Dict[str, dict] = {v: {} for v in cov.old_variables}

    def _rule(self, var: str):
        one = Poly.const(1)
        target = sym(var)
        cov = self.cov

        def rule(a):
            if a == target:
                return one
            if a[0] == "j" and a[1] == cov.new_dependent:
                acc = Poly()
                for n in cov.new_variables:
                    dn = self.partials[(n, var)]
                    if dn.terms:
                        acc = acc + Poly.jet(cov.new_dependent, a[2] + (n,)) * dn
                return acc
            return None

        return rule

    def derivative(self, index: Sequence[str]) -> Poly:
        index = tuple(sorted(index))
        got = self._cache.get(index)
        if got is not None:
            return got
        parent = self.derivative(index[:-1])
        v = index[-1]
        out = P.derive(parent, self._rule(v), self._rule_caches[v])
        self._cache[index] = out
        return out


def _linear_split(d: Poly, v: tuple) -> Optional[Tuple[Poly, Poly]]:
    """(c1, c0) with ``d = c1*v + c0`` if ``d`` is affine in the plain symbol ``v``."""
    for m in d.terms:
        for at, e in m:
            if at == v and e != 1:
                return None
            if at[0] in "pe" and v in Poly.from_key(at[1]).atoms():
                return None
    c1 = d.coeff_of(v, 1)
    if not c1.terms:
        return None
    return c1, d.coeff_of(v, 0)


def invert(cov: ChangeOfVariables) -> Tuple[Dict[tuple, Poly], Tuple[str, ...]]:
    """Express old variables through new ones by linear elimination.

    Returns the map ``old symbol -> Poly`` (in new variables and the
    suppressed old variables) and the names of the suppressed variables.
    """
    pending = [(Poly.symbol(n), d) for n, d in zip(cov.new_variables, cov.definitions)]
    solved: Dict[tuple, Poly] = {}
    order = {v: i for i, v in enumerate(cov.old_variables)}
    while pending:
        best = None
        for k, (target, d) in enumerate(pending):
            for v in cov.old_variables:
                if sym(v) in solved or sym(v) not in d.atoms():
                    continue
                split = _linear_split(d, sym(v))
                if split is None or len(split[0].terms) != 1:
                    continue
                score = (0 if split[0].is_const() else 1, len(d.terms), order[v], k)
                if best is None or score < best[0]:
                    best = (score, k, v, split)
        if best is None:
            raise ReductionError(f"cannot invert the change of variables {cov.name!r} by linear elimination")
        _, k, v, (c1, c0) = best
        target, _ = pending.pop(k)
        image = (target - c0) * c1.inverse_monomial()
        m = {sym(v): image}
        solved = {a: P.subs(p, m) for a, p in solved.items()}
        solved[sym(v)] = image
        pending = [(t, P.subs(d, m)) for t, d in pending]
    suppressed = tuple(v for v in cov.old_variables if sym(v) not in solved)
    return solved, suppressed


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------

def _depends(at: tuple, targets: frozenset) -> bool:
    if at[0] in "sj":
        return at in targets
    if at[0] in "pe":
        return bool(Poly.from_key(at[1]).atoms() & targets)
    return False


def common_factor(p: Poly, select=lambda at: True) -> Tuple[Poly, Poly]:
    """Split ``p = factor * quotient`` with ``factor`` a monomial in selected atoms.

    Powers use the minimum exponent over all terms; an ``exp`` atom is
    extracted only when every term carries the identical one.
    """
    if not p.terms:
        return Poly.const(1), p
    monos = list(p.terms)
    present = None
    for m in monos:
        here = {at: e for at, e in m if select(at)}
        if present is None:
            present = here
        else:
            present = {at: e for at, e in present.items() if at in here}
            for at in list(present):
                if at[0] == "e":
                    if here[at] != present[at]:
                        del present[at]
                else:
                    present[at] = min(present[at], here[at])
    if not present:
        return Poly.const(1), p
    factor_items = tuple(sorted(present.items()))
    factor = Poly({factor_items: 1})
    out = Poly()
    simple = {}
    for m, c in p.terms.items():
        rest = []
        extra = Poly.const(1)
        for at, e in m:
            if at in present:
                ne = P.q(e - present[at])
                if ne == 0:
                    continue
                if at[0] == "p":
                    extra = extra * Poly.atom(at, ne)
                    continue
                rest.append((at, ne))
            else:
                rest.append((at, e))
        if extra.is_const() and extra.const_value() == 1:
            simple[tuple(rest)] = c
        else:
            out = out + Poly({tuple(rest): c}) * extra
    return factor, Poly(simple) + out


@dataclass
class ReducedEquation:
    expression: Poly
    factor: Poly
    variables: Tuple[str, ...]
    dependent: str
    suppressed: Tuple[str, ...]
    sigma_base: Optional[Poly] = None
    depends_on_suppressed: bool = False
    note: str = ""
    substituted: Optional[Poly] = field(default=None, repr=False)

    def factor_display(self) -> Poly:
        if self.sigma_base is None:
            return self.factor
        return P.subs(self.factor, {sym(SIGMA): self.sigma_base})

    @property
    def order(self) -> int:
        return max((len(a[2]) for a in self.expression.jets()), default=0)


def _reparameterize(expr: Poly, images: Dict[tuple, Poly], s: str):
    """Pick a base ``B`` affine in ``s`` among sum-power atoms; ``s = (sigma - c0)/c1``."""
    counts: Dict[tuple, int] = {}
    for m in expr.terms:
        for at, _ in m:
            if at[0] == "p" and sym(s) in Poly.from_key(at[1]).atoms():
                counts[at] = counts.get(at, 0) + 1
    for at, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        base = Poly.from_key(at[1])
        b = P.subs(base, images)
        split = _linear_split(b, sym(s))
        if split is None or len(split[0].terms) != 1 or sym(s) in split[1].atoms():
            continue
        c1, c0 = split
        return b, (Poly.symbol(SIGMA) - c0) * c1.inverse_monomial()
    return None, None


def reduce_by(delta: Poly, cov: ChangeOfVariables, check_seed: int = 0) -> ReducedEquation:
    """Apply ``cov`` to ``delta`` and split off the suppressed-variable factor."""
    if check_rank(cov, seed=check_seed) < len(cov.new_variables):
        raise RankDeficient(f"change of variables {cov.name!r} is rank deficient")
    chain = ChainRule(cov)
    mapping = {}
    for at in delta.jets():
        if at[1] != cov.old_dependent:
            raise ReductionError(f"unexpected function {at[1]} in the equation")
        mapping[at] = chain.derivative(at[2])
    substituted = P.subs(delta, mapping)
    images, suppressed = invert(cov)
    sigma_base = None
    if len(suppressed) == 1:
        s = suppressed[0]
        base, s_image = _reparameterize(substituted, images, s)
        if base is not None:
            images = {a: P.subs(p, {sym(s): s_image}) for a, p in images.items()}
            images[sym(s)] = s_image
            sigma_base = base
    full = P.subs(substituted, images)
    targets = frozenset(sym(s) for s in suppressed) | ({sym(SIGMA)} if sigma_base is not None else set())
    targets = frozenset(targets)
    factor, quotient = common_factor(full, lambda at: _depends(at, targets))
    leftover = bool(quotient.atoms() & targets)
    note = "quotient depends on suppressed variable" if leftover else ""
    if not quotient.terms:
        note = "equation vanishes identically under the substitution"
    return ReducedEquation(quotient, factor, cov.new_variables, cov.new_dependent, suppressed,
                           sigma_base, leftover, note, full)


def apply_similarity(delta: Poly, cov: ChangeOfVariables, check_seed: int = 0) -> ReducedEquation:
    return reduce_by(delta, cov, check_seed)


def second_stage_reduce(re: ReducedEquation, cov2: ChangeOfVariables, check_seed: int = 0) -> ReducedEquation:
    if len(re.variables) != 2:
        raise ReductionError("second stage expects a reduced equation in two variables")
    if len(cov2.new_variables) != 1:
        raise ReductionError("second stage must map to a single variable")
    if tuple(cov2.old_variables) != tuple(re.variables) or cov2.old_dependent != re.dependent:
        raise ReductionError("second stage variables do not match the first stage")
    return reduce_by(re.expression, cov2, check_seed)


# ---------------------------------------------------------------------------
# consistency identity
# ---------------------------------------------------------------------------

@dataclass
class ConsistencyStats:
    points: int
    max_rel_error: float
    tol: float
    resampled: int = 0

    @property
    def passed(self) -> bool:
        return self.points > 0 and self.max_rel_error <= self.tol


def _test_function(rng: random.Random, names: Sequence[str]) -> Poly:
    arg = Poly()
    lin = Poly()
    for n in names:
        arg = arg + Poly.symbol(n).scale(_random_rational(rng, Fraction(1, 8), Fraction(1, 2), 8))
        lin = lin + Poly.symbol(n).scale(_random_rational(rng, Fraction(1, 2), Fraction(2), 8))
    return Poly.const(3) + P.exp(arg) + (lin * lin * lin).scale(_random_rational(rng, Fraction(1, 8), 1, 8))


def consistency_check(delta: Poly, cov: ChangeOfVariables, reduced: ReducedEquation, seed: int,
                      points: int = 20, tol: float = 1e-9, box=(Fraction(1), Fraction(3)),
                      dps: int = 30) -> ConsistencyStats:
    """Check ``delta[u_test] == factor * quotient[F_test]`` at random points.

    ``u_test`` is built from an explicit test function ``F_test`` and
    differentiated directly in the old coordinates, so the check is
    independent of the chain-rule bookkeeping used by the reduction.
    """
    rng = random.Random(seed)
    f_test = _test_function(rng, cov.new_variables)
    composed = P.subs(f_test, {sym(n): d for n, d in zip(cov.new_variables, cov.definitions)})
    u_test = P.subs(cov.form, {P.jet(cov.new_dependent): composed})
    jets: Dict[tuple, Poly] = {(): u_test}

    def old_jet(index):
        if index not in jets:
            jets[index] = P.diff(old_jet(index[:-1]), sym(index[-1]))
        return jets[index]

    needed = sorted(delta.jets(), key=lambda a: (len(a[2]), a[2]))
    f_jets = {}
    for at in reduced.expression.jets():
        p = f_test
        for v in at[2]:
            p = P.diff(p, sym(v))
        f_jets[at] = p
    params = set()
    for p in (delta, u_test, reduced.expression, reduced.factor) + cov.definitions:
        params |= {a[1] for a in p.symbols()}
    params -= set(cov.old_variables) | set(cov.new_variables) | {SIGMA}
    worst = 0.0
    done = 0
    tries = 0
    with mpmath.workdps(dps):
        while done < points:
            tries += 1
            if tries > 20 * points:
                break
            pt = _box_point(rng, sorted(cov.old_variables) + sorted(params), box)
            try:
                vals = dict(pt)
                for at in needed:
                    vals[at] = P.evaluate(old_jet(at[2]), pt, "mp")
                lhs = P.evaluate(delta, vals, "mp")
                scale = max([abs(t) for t in P.term_values(delta, vals, "mp")] + [mpmath.mpf(10) ** (-dps // 2)])
                new_vals = {a: v for a, v in pt.items() if a[1] in params}
                for n, d in zip(cov.new_variables, cov.definitions):
                    new_vals[sym(n)] = P.evaluate(d, pt, "mp")
                for s in reduced.suppressed:
                    new_vals[sym(s)] = pt[sym(s)]
                if reduced.sigma_base is not None:
                    new_vals[sym(SIGMA)] = P.evaluate(reduced.sigma_base, pt, "mp")
                fvals = {a: P.evaluate(p, new_vals, "mp") for a, p in f_jets.items()}
                rhs = (P.evaluate(reduced.factor, {**new_vals, **fvals}, "mp")
                       * P.evaluate(reduced.expression, {**new_vals, **fvals}, "mp"))
            except (DomainError, ZeroDivisionError, ValueError):
                continue
            err = float(abs(lhs - rhs) / scale)
            worst = max(worst, err)
            done += 1
    return ConsistencyStats(done, worst, tol, tries - done)


# ---------------------------------------------------------------------------
# proportionality
# ---------------------------------------------------------------------------

@dataclass
class ProportionalityVerdict:
    proportional: bool
    ratio: Optional[str]
    factor_varies: bool
    base_points: int
    fiber_points: int
    max_spread: float
    stripped: Tuple[str, str]
    ratios: List[List[str]] = field(default_factory=list)
    note: str = ""

    @property
    def label(self) -> str:
        return "PROPORTIONAL" if self.proportional else "NOT PROPORTIONAL"


def strip_content(p: Poly) -> Tuple[Poly, Poly]:
    """Remove the largest monomial dividing every term (returns content, rest)."""
    return common_factor(p, lambda at: at[0] != "c")


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(v, 12) if isinstance(v, mpmath.mpf) else repr(float(v))


def equations_proportional(e1: Poly, e2: Poly, fiber: Optional[Sequence[tuple]] = None,
                           seed: int = 0, base_points: int = 5, fiber_points: int = 8,
                           tol: float = 1e-9, box=(Fraction(1), Fraction(3)),
                           strip: bool = True) -> ProportionalityVerdict:
    """Is ``e1/e2`` constant along the fiber (jet coordinates) at each base point?"""
    from .expr import to_text

    if fiber_points < 8:
        raise ValueError("at least 8 fiber points are required")
    c1 = c2 = Poly.const(1)
    if strip:
        c1, e1 = strip_content(e1)
        c2, e2 = strip_content(e2)
    stripped = (to_text(c1), to_text(c2))
    if not e2.terms:
        raise DegenerateSample("reference equation is identically zero")
    fiber_atoms = sorted(fiber if fiber is not None else (e1.jets() | e2.jets()))
    base_names = sorted({a[1] for a in (e1.symbols() | e2.symbols())} - {a[1] for a in fiber_atoms if a[0] == "s"})
    for attempt in range(2):
        rng = random.Random(seed * 1000003 + attempt)
        degenerate = False
        rows = []
        reps = []
        spread = 0.0
        ok = True
        for _ in range(base_points):
            base = _box_point(rng, base_names, box)
            ratios = []
            zeros = 0
            for _ in range(fiber_points):
                vals = dict(base)
                for at in fiber_atoms:
                    if at[0] == "j" and not at[2]:
                        vals[at] = _random_rational(rng, Fraction(1, 2), 3, 32)
                    else:
                        v = _random_rational(rng, -3, 3, 48)
                        vals[at] = v if v != 0 else Fraction(1, 7)
                try:
                    a = P.evaluate(e1, vals, "exact")
                    b = P.evaluate(e2, vals, "exact")
                except DomainError:
                    zeros += 1
                    continue
                if b == 0 or abs(b) < 1e-300:
                    zeros += 1
                    continue
                ratios.append(a / b if isinstance(a, Fraction) and isinstance(b, Fraction) else float(a) / float(b))
            if zeros * 2 > fiber_points:
                degenerate = True
                break
            r0 = ratios[0]
            mag = max(abs(float(r)) for r in ratios)
            sp = max(abs(float(r - r0)) for r in ratios) / (mag if mag > 0 else 1.0)
            spread = max(spread, sp)
            if r0 == 0 or sp > tol:
                ok = False
            reps.append(r0)
            rows.append([_fmt(r) for r in ratios[:4]])
        if degenerate:
            continue
        varies = False
        if ok and reps:
            top = max(abs(float(r)) for r in reps)
            varies = any(abs(float(r - reps[0])) > tol * top for r in reps)
        ratio = _fmt(reps[0]) if ok and not varies else None
        return ProportionalityVerdict(ok, ratio, varies, base_points, fiber_points, spread, stripped, rows)
    raise DegenerateSample("the second equation vanishes at most sample points")
