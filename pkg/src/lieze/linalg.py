"""Exact rational linear algebra: fraction-free elimination, RREF, nullspace."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

Row = List[Fraction]


def _to_int_row(row: Sequence) -> List[int]:
    den = 1
    for v in row:
        d = Fraction(v).denominator
        den = den * d // gcd(den, d)
    out = [int(Fraction(v) * den) for v in row]
    return _primitive(out)


def _primitive(row: List[int]) -> List[int]:
    g = 0
    for v in row:
        if v:
            g = gcd(g, v)
            if g == 1:
                break
    if g > 1:
        row = [v // g for v in row]
    for v in row:
        if v:
            if v < 0:
                row = [-x for x in row]
            break
    return row


class Echelon:
    """Incrementally maintained integer row echelon form.

    Rows are kept primitive (content 1, positive leading entry), which keeps
    the integers small without ever introducing fractions.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict = {}  # pivot column -> integer row

    def reduce(self, row: List[int]) -> List[int]:
        row = list(row)
        for c in range(self.ncols):
            a = row[c]
            if not a:
                continue
            piv = self.rows.get(c)
            if piv is None:
                continue
            p = piv[c]
            g = gcd(a, p)
            ma, mp = p // g, a // g
            row = [ma * x - mp * y for x, y in zip(row, piv)]
        return row

    def add(self, row: Sequence) -> bool:
        """Insert a rational row; returns True if it raised the rank."""
        r = self.reduce(_to_int_row(row))
        for c, v in enumerate(r):
            if v:
                self.rows[c] = _primitive(r)
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)

    def rref(self) -> Tuple[List[Row], List[int]]:
        pivots = sorted(self.rows)
        rows = {c: list(self.rows[c]) for c in pivots}
        # back elimination, still fraction-free
        for c in reversed(pivots):
            pr = rows[c]
            for c2 in pivots:
                if c2 >= c:
                    break
                r = rows[c2]
                a = r[c]
                if a:
                    p = pr[c]
                    g = gcd(a, p)
                    rows[c2] = _primitive([(p // g) * x - (a // g) * y for x, y in zip(r, pr)])
        out = []
        for c in pivots:
            r = rows[c]
            p = r[c]
            out.append([Fraction(v, p) for v in r])
        return out, pivots


def rref(matrix: Sequence[Sequence], ncols: Optional[int] = None) -> Tuple[List[Row], List[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    ech = Echelon(ncols)
    for row in matrix:
        ech.add(row)
    return ech.rref()


def rank(matrix: Sequence[Sequence], ncols: Optional[int] = None) -> int:
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    ech = Echelon(ncols)
    for row in matrix:
        ech.add(row)
    return ech.rank


def nullspace_from_rref(R: List[Row], pivots: List[int], ncols: int) -> List[Row]:
    """Basis of the nullspace, each vector scaled so its first nonzero is 1."""
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in zip(R, pivots):
            v[pc] = -r[f]
        lead = next(x for x in v if x != 0)
        basis.append([x / lead for x in v])
    return basis


def nullspace(matrix: Sequence[Sequence], ncols: Optional[int] = None) -> List[Row]:
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    R, piv = rref(matrix, ncols)
    return nullspace_from_rref(R, piv, ncols)


def solve(columns: Sequence[Sequence], target: Sequence) -> Optional[Row]:
    """Coefficients ``c`` with ``sum(c[k] * columns[k]) == target``, or None.

    Columns must be linearly independent for the answer to be unique.
    """
    n = len(columns)
    m = len(target)
    aug = [[Fraction(columns[k][i]) for k in range(n)] + [Fraction(target[i])] for i in range(m)]
    R, piv = rref(aug, n + 1)
    if n in piv:
        return None
    sol = [Fraction(0)] * n
    for r, pc in zip(R, piv):
        sol[pc] = r[n]
    return sol
