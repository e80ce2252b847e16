"""Prolongation, determining equations and Lie algebra structure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from . import poly as P
from .poly import JetOrderOverflow, Poly


class NotLinearInLeading(ValueError):
    pass


class LeadingAbsent(ValueError):
    pass


class DependentBasis(ValueError):
    pass


class ParametricSystem(ValueError):
    """Determining coefficients involve free constants (not supported)."""


@dataclass(frozen=True)
class VectorField:
    """``sum(coeffs[i] * d/d variables[i]) + coeffs[-1] * d/d dependent``."""

    variables: Tuple[str, ...]
    dependent: str
    coeffs: Tuple[Poly, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.coeffs) != len(self.variables) + 1:
            raise ValueError("need one coefficient per variable plus one for the dependent variable")
        for c in self.coeffs:
            for a in c.jets():
                if a[2]:
                    raise ValueError("vector field coefficients may not contain derivatives")

    @property
    def coordinates(self) -> Tuple[tuple, ...]:
        """Atoms of the base space (independent symbols, then the dependent)."""
        return tuple(("s", v) for v in self.variables) + (("j", self.dependent, ()),)

    def component(self, name: str) -> Poly:
        if name == self.dependent:
            return self.coeffs[-1]
        return self.coeffs[self.variables.index(name)]

    def apply(self, f: Poly) -> Poly:
        """Action as a first-order derivation on functions of the base space."""
        out = Poly()
        for at, c in zip(self.coordinates, self.coeffs):
            if c.terms:
                d = P.diff(f, at)
                if d.terms:
                    out = out + c * d
        return out

    def scaled(self, k) -> "VectorField":
        return VectorField(self.variables, self.dependent, tuple(c.scale(k) for c in self.coeffs), self.name)

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField(self.variables, self.dependent,
                           tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return self + other.scaled(-1)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def _check(self, other):
        if self.variables != other.variables or self.dependent != other.dependent:
            raise ValueError("vector fields live on different spaces")

    def vector(self) -> Dict[tuple, object]:
        """Sparse coordinates over (component index, monomial)."""
        out = {}
        for i, c in enumerate(self.coeffs):
            for m, v in c.terms.items():
                out[(i, m)] = v
        return out


def zero_field(variables, dependent) -> VectorField:
    return VectorField(tuple(variables), dependent, tuple(Poly() for _ in range(len(variables) + 1)))


# ---------------------------------------------------------------------------
# prolongation
# ---------------------------------------------------------------------------

class ProlongedField:
    """Lazily computed prolongation coefficients ``phi^J`` up to ``order``.

    ``phi^{J+i} = D_i(phi^J) - sum_k D_i(X^k) u_{J+k}``.
    """

    def __init__(self, field: VectorField, order: int):
        if order < 1:
            raise ValueError("prolongation order must be >= 1")
        self.field = field
        self.order = order
        dep = field.dependent
        self._coeffs: Dict[Tuple[str, ...], Poly] = {(): field.coeffs[-1]}
        self._dx: Dict[Tuple[str, int], Poly] = {}

    def _total(self, p: Poly, var: str) -> Poly:
        return P.total_derivative(p, var, self.order)

    def _dX(self, var: str, k: int) -> Poly:
        key = (var, k)
        r = self._dx.get(key)
        if r is None:
            r = self._total(self.field.coeffs[k], var)
            self._dx[key] = r
        return r

    def coefficient(self, index) -> Poly:
        idx = tuple(sorted(index))
        if len(idx) > self.order:
            raise JetOrderOverflow(f"jet order {len(idx)} exceeds prolongation order {self.order}")
        c = self._coeffs.get(idx)
        if c is not None:
            return c
        # peel off the last index: phi^{J+i} from phi^J
        i = idx[-1]
        parent = idx[:-1]
        base = self.coefficient(parent)
        out = self._total(base, i)
        dep = self.field.dependent
        for k, var in enumerate(self.field.variables):
            dx = self._dX(i, k)
            if dx.terms:
                out = out - dx * Poly.jet(dep, parent + (var,))
        self._coeffs[idx] = out
        return out

    def coefficient_via(self, path: Sequence[str]) -> Poly:
        """Same coefficient computed along an explicit index order (for checks)."""
        cur = self.field.coeffs[-1]
        done: Tuple[str, ...] = ()
        dep = self.field.dependent
        for i in path:
            out = self._total(cur, i)
            for k, var in enumerate(self.field.variables):
                dx = self._dX(i, k)
                if dx.terms:
                    out = out - dx * Poly.jet(dep, done + (var,))
            cur = out
            done = tuple(sorted(done + (i,)))
        return cur

    def all_coefficients(self) -> Dict[Tuple[str, ...], Poly]:
        vs = self.field.variables
        for n in range(1, self.order + 1):
            for idx in itertools.combinations_with_replacement(sorted(vs), n):
                self.coefficient(idx)
        return dict(self._coeffs)


def prolong(v: VectorField, order: int) -> ProlongedField:
    return ProlongedField(v, order)


def characteristic_coefficient(v: VectorField, index: Sequence[str], max_order: Optional[int] = None) -> Poly:
    """``phi^J = D_J(Q) + sum_i X^i u_{J+i}`` with ``Q = U - sum_i X^i u_i``."""
    dep = v.dependent
    Q = v.coeffs[-1]
    for k, var in enumerate(v.variables):
        Q = Q - v.coeffs[k] * Poly.jet(dep, (var,))
    cur = Q
    for i in index:
        cur = P.total_derivative(cur, i, max_order)
    for k, var in enumerate(v.variables):
        cur = cur + v.coeffs[k] * Poly.jet(dep, tuple(index) + (var,))
    return cur


def apply_prolonged(pv: ProlongedField, delta: Poly) -> Poly:
    """``Pr(V)(delta)`` in normal form."""
    v = pv.field
    out = Poly()
    for k, var in enumerate(v.variables):
        c = v.coeffs[k]
        if c.terms:
            d = P.diff(delta, ("s", var))
            if d.terms:
                out = out + c * d
    for at in sorted(delta.jets()):
        if at[1] != v.dependent:
            continue
        d = P.diff(delta, at)
        if not d.terms:
            continue
        phi = pv.coefficient(at[2])
        if phi.terms:
            out = out + phi * d
    return out


def jet_order_of(e: Poly, dependent: Optional[str] = None) -> int:
    return max((len(a[2]) for a in e.jets() if dependent is None or a[1] == dependent), default=0)


# ---------------------------------------------------------------------------
# on-manifold reduction
# ---------------------------------------------------------------------------

def split_leading(delta: Poly, leading: tuple) -> Tuple[Poly, Poly]:
    """Write ``delta = kappa * leading + rest``; both parts free of ``leading``."""
    if leading not in delta.atoms():
        raise LeadingAbsent(f"{leading} does not occur in the equation")
    deg = delta.degree_in(leading)
    if deg != 1:
        raise NotLinearInLeading(f"equation has degree {deg} in the leading derivative")
    kappa = delta.coeff_of(leading, 1)
    rest = delta.coeff_of(leading, 0)
    if leading in kappa.atoms() or leading in rest.atoms() or kappa.is_zero():
        raise NotLinearInLeading("leading derivative is not an isolated linear variable")
    if kappa.terms and rest.terms and (kappa * Poly.atom(leading) + rest) != delta:
        raise NotLinearInLeading("leading derivative occurs inside a nonpolynomial atom")
    return kappa, rest


def on_manifold_reduce(e: Poly, delta: Poly, leading: tuple) -> Tuple[Poly, int]:
    """Eliminate ``leading`` using ``delta = 0`` and clear the denominator.

    Returns ``(kappa**d * e|_{leading=-rest/kappa}, d)``.
    """
    kappa, rest = split_leading(delta, leading)
    if leading not in e.atoms():
        return e, 0
    d = e.degree_in(leading)
    if type(d) is not int or d < 0:
        raise NotLinearInLeading("expression is not polynomial in the leading derivative")
    out = Poly()
    neg_rest = -rest
    for k in range(d + 1):
        ek = e.coeff_of(leading, k)
        if ek.terms:
            out = out + ek * neg_rest.pow(k) * kappa.pow(d - k)
    return out, d


# ---------------------------------------------------------------------------
# determining system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ansatz:
    indep_degree: int = 2
    dep_degree: int = 1


@dataclass
class LinearSystem:
    matrix: List[List[Fraction]]
    columns: List[Tuple[int, tuple]]  # (component index, monomial over base coords)
    variables: Tuple[str, ...]
    dependent: str
    cleared_power: int = 0
    kappa: Optional[Poly] = None

    @property
    def ncols(self) -> int:
        return len(self.columns)

    def column_labels(self) -> List[str]:
        from .expr import to_text

        comps = list(self.variables) + [self.dependent]
        return [f"{comps[i]}:{to_text(Poly({m: 1}))}" for i, m in self.columns]

    def field_from_vector(self, vec: Sequence[Fraction], name: str = "") -> VectorField:
        coeffs = [dict() for _ in range(len(self.variables) + 1)]
        for (i, m), v in zip(self.columns, vec):
            if v != 0:
                coeffs[i][m] = P.q(v)
        return VectorField(self.variables, self.dependent, tuple(Poly(c) for c in coeffs), name)


def ansatz_monomials(variables: Sequence[str], dependent: str, ansatz: Ansatz) -> List[tuple]:
    """Monomials over (variables, dependent) in graded-lex order."""
    nv = len(variables)
    exps = []
    for e in itertools.product(range(ansatz.indep_degree + 1), repeat=nv):
        if sum(e) > ansatz.indep_degree:
            continue
        for ed in range(ansatz.dep_degree + 1):
            exps.append(tuple(e) + (ed,))
    exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    coords = [("s", v) for v in variables] + [("j", dependent, ())]
    out = []
    for e in exps:
        out.append(tuple(sorted((coords[k], x) for k, x in enumerate(e) if x)))
    return out


def generic_field(variables, dependent, ansatz: Ansatz):
    """Ansatz field with one unknown symbol per (component, monomial)."""
    monos = ansatz_monomials(variables, dependent, ansatz)
    columns = []
    coeffs = []
    unknowns = []
    comps = list(variables) + [dependent]
    for i, comp in enumerate(comps):
        d = {}
        for j, m in enumerate(monos):
            k = ("s", f"_k{i}_{j}")
            unknowns.append(k)
            columns.append((i, m))
            mono = tuple(sorted(m + ((k, 1),)))
            d[mono] = 1
        coeffs.append(Poly(d))
    return VectorField(tuple(variables), dependent, tuple(coeffs)), unknowns, columns


def determining_system(delta: Poly, ansatz: Ansatz, leading: tuple,
                       variables: Sequence[str], dependent: str,
                       order: Optional[int] = None) -> LinearSystem:
    """Linear homogeneous system for the ansatz unknowns.

    Rows are the coefficients of every monomial (in jets, variables and
    parameters) of the on-manifold reduced ``Pr(V)(delta)``.
    """
    v, unknowns, columns = generic_field(variables, dependent, ansatz)
    n = order or jet_order_of(delta, dependent)
    pv = prolong(v, max(n, 1))
    expr = apply_prolonged(pv, delta)
    reduced, power = on_manifold_reduce(expr, delta, leading)
    col_of = {u: i for i, u in enumerate(unknowns)}
    rows: Dict[tuple, Dict[int, object]] = {}
    for m, c in reduced.terms.items():
        hits = [(at, e) for at, e in m if at in col_of]
        if len(hits) != 1 or hits[0][1] != 1:
            raise ValueError("determining expression is not linear in the ansatz unknowns")
        rest = tuple(p for p in m if p[0] not in col_of)
        for at, _ in rest:
            if at[0] == "s" and at[1] not in variables:
                raise ParametricSystem(f"free constant '{at[1]}' in determining equations")
            if at[0] in "pec":
                raise ParametricSystem("determining equations are not polynomial")
        rows.setdefault(rest, {})[col_of[hits[0][0]]] = c
    ncols = len(columns)
    matrix = []
    for key in sorted(rows):
        r = [Fraction(0)] * ncols
        for j, c in rows[key].items():
            r[j] = Fraction(c)
        matrix.append(r)
    kappa, _ = split_leading(delta, leading)
    return LinearSystem(matrix, columns, tuple(variables), dependent, power, kappa)


def solve_nullspace(system: LinearSystem) -> List[VectorField]:
    basis = linalg.nullspace(system.matrix, system.ncols)
    return [system.field_from_vector(vec, f"S{k + 1}") for k, vec in enumerate(basis)]


def nullspace_vectors(system: LinearSystem) -> List[List[Fraction]]:
    return linalg.nullspace(system.matrix, system.ncols)


# ---------------------------------------------------------------------------
# Lie algebra structure
# ---------------------------------------------------------------------------

def commutator(v: VectorField, w: VectorField) -> VectorField:
    """``[v, w]^i = v(w^i) - w(v^i)``."""
    v._check(w)
    coeffs = tuple(v.apply(wc) - w.apply(vc) for vc, wc in zip(v.coeffs, w.coeffs))
    return VectorField(v.variables, v.dependent, coeffs)


def _coordinate_matrix(fields: Sequence[VectorField]):
    keys = sorted({k for f in fields for k in f.vector()})
    index = {k: i for i, k in enumerate(keys)}
    rows = []
    for f in fields:
        r = [Fraction(0)] * len(keys)
        for k, v in f.vector().items():
            if not isinstance(v, (int, Fraction)):
                raise TypeError("non-rational coefficient")
            r[index[k]] = Fraction(v)
        rows.append(r)
    return rows, keys


def field_rank(fields: Sequence[VectorField]) -> int:
    if not fields:
        return 0
    rows, keys = _coordinate_matrix(fields)
    return linalg.rank(rows, len(keys))


def span_equal(a: Sequence[VectorField], b: Sequence[VectorField]) -> bool:
    ra, rb = field_rank(a), field_rank(b)
    return ra == rb == field_rank(list(a) + list(b))


def span_contains(big: Sequence[VectorField], small: Sequence[VectorField]) -> bool:
    return field_rank(big) == field_rank(list(big) + list(small))


def coordinates_in(basis: Sequence[VectorField], v: VectorField) -> Optional[List[Fraction]]:
    rows, keys = _coordinate_matrix(list(basis) + [v])
    cols = rows[:-1]
    return linalg.solve(cols, rows[-1])


NOT_IN_SPAN = None


@dataclass
class CommutatorTable:
    basis: List[VectorField]
    entries: List[List[Optional[List[Fraction]]]]

    @property
    def labels(self) -> List[str]:
        return [b.name or f"V{i + 1}" for i, b in enumerate(self.basis)]

    def structure_constants(self) -> Dict[Tuple[int, int, int], Fraction]:
        out = {}
        for i, row in enumerate(self.entries):
            for j, coords in enumerate(row):
                if coords is None:
                    continue
                for k, c in enumerate(coords):
                    if c != 0:
                        out[(i, j, k)] = c
        return out

    def closed(self) -> bool:
        return all(e is not None for row in self.entries for e in row)

    def antisymmetric(self) -> bool:
        n = len(self.basis)
        for i in range(n):
            if self.entries[i][i] is None or any(self.entries[i][i]):
                return False
            for j in range(n):
                a, b = self.entries[i][j], self.entries[j][i]
                if a is None or b is None or any(x + y != 0 for x, y in zip(a, b)):
                    return False
        return True


def commutator_table(basis: Sequence[VectorField]) -> CommutatorTable:
    basis = list(basis)
    if field_rank(basis) != len(basis):
        raise DependentBasis("basis vector fields are linearly dependent")
    n = len(basis)
    entries: List[List[Optional[List[Fraction]]]] = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                entries[i][j] = [Fraction(0)] * n
                continue
            if j < i and entries[j][i] is not None:
                entries[i][j] = [-x for x in entries[j][i]]
                continue
            c = commutator(basis[i], basis[j])
            if c.is_zero():
                entries[i][j] = [Fraction(0)] * n
            else:
                entries[i][j] = coordinates_in(basis, c)
    return CommutatorTable(basis, entries)


def jacobi_holds(basis: Sequence[VectorField]) -> bool:
    """Exact Jacobi identity for every ordered triple of basis fields."""
    n = len(basis)
    br = {}
    for i in range(n):
        for j in range(n):
            br[(i, j)] = commutator(basis[i], basis[j])
    for i, j, k in itertools.product(range(n), repeat=3):
        s = (commutator(br[(i, j)], basis[k]) + commutator(br[(j, k)], basis[i])
             + commutator(br[(k, i)], basis[j]))
        if not s.is_zero():
            return False
    return True


def expand_parametric(field: VectorField, params: Sequence[str]) -> List[VectorField]:
    """Split a field linear in ``params`` into one field per parameter."""
    out = []
    for name in params:
        at = ("s", name)
        coeffs = tuple(P.diff(c, at) for c in field.coeffs)
        out.append(VectorField(field.variables, field.dependent, coeffs, name))
    return out
