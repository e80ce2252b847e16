"""Sparse expanded normal form used by every symbolic operation.

A :class:`Poly` is a finite sum ``sum(coeff * monomial)`` where a monomial is a
sorted tuple of ``(atom, exponent)`` pairs.  Atoms are plain tuples so that
hashing and ordering come for free:

``('s', name)``
    a symbol (independent variable, constant, ansatz unknown)
``('j', dep, index)``
    a jet coordinate; ``index`` is the sorted tuple of differentiation
    variables, ``()`` for the dependent variable itself
``('p', key)``
    a multi-term polynomial ``key`` raised to a non positive-integer power
``('c', q)``
    a positive rational raised to a fractional power in ``(0, 1)``
``('e', key)``
    ``exp`` of the polynomial ``key``; at most one per monomial, exponent 1

Coefficients and exponents are ``int`` when integral, ``Fraction`` otherwise.
Fractional powers of monomials are distributed over their factors, which
assumes positive bases (principal real branch).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional, Tuple

Atom = tuple
Monomial = Tuple[Tuple[Atom, object], ...]


class DomainError(ArithmeticError):
    """Evaluation outside the real domain (even root of a negative, 1/0)."""


class JetOrderOverflow(ValueError):
    pass


class NotPolynomial(ValueError):
    pass


def q(value) -> object:
    """Canonical rational: ``int`` if integral, else ``Fraction``."""
    if type(value) is int:
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, float):
        raise TypeError("floats are not exact rationals")
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else value


def sym(name: str) -> Atom:
    return ("s", name)


def jet(dep: str, index: Iterable[str] = ()) -> Atom:
    return ("j", dep, tuple(sorted(index)))


def jet_order(atom: Atom) -> int:
    return len(atom[2])


# ---------------------------------------------------------------------------
# monomial arithmetic
# ---------------------------------------------------------------------------

def _iroot(n: int, k: int) -> Optional[int]:
    if n < 0:
        return None
    if n < 2:
        return n
    guess = int(round(math.exp(math.log(n) / k)))
    for cand in (guess - 1, guess, guess + 1):
        if cand >= 0 and cand**k == n:
            return cand
    if guess**k < 2**50:
        return None
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def exact_root(c: Fraction, k: int) -> Optional[Fraction]:
    """Rational k-th root of a positive rational, or None."""
    c = Fraction(c)
    a = _iroot(c.numerator, k)
    if a is None:
        return None
    b = _iroot(c.denominator, k)
    if b is None:
        return None
    return Fraction(a, b)


def _const_pow(c, r):
    """Split ``c**r`` into (rational coefficient, const atom exponent or None).

    Returns ``None`` when the result is not real (negative base, even root).
    """
    if type(r) is int:
        return q(Fraction(c) ** r), None
    c = Fraction(c)
    sign = 1
    if c < 0:
        if r.denominator % 2 == 0:
            return None
        c = -c
        sign = -1 if r.numerator % 2 else 1
    n = math.floor(r)
    f = r - n
    coef = sign * c**n
    root = exact_root(c, f.denominator)
    if root is not None:
        return q(coef * root**f.numerator), None
    return q(coef), (("c", q(c)), q(f))


def _fix(d: dict):
    """Canonicalize an atom->exponent dict.

    Returns ``(coef, monomial, expansions)`` where ``expansions`` lists
    ``(Poly, n)`` factors still to be multiplied in (sum bases raised to a
    positive integer power), or ``None``.
    """
    coef = 1
    expand = None
    exp_arg = None
    out = {}
    for at, e in d.items():
        k = at[0]
        if e == 0:
            continue
        if k == "e":
            a = Poly.from_key(at[1])
            a = a if e == 1 else a.scale(e)
            exp_arg = a if exp_arg is None else exp_arg + a
        elif k == "c":
            res = _const_pow(at[1], q(e))
            coef = q(coef * res[0])
            if res[1] is not None:
                cat, ce = res[1]
                out[cat] = q(out.get(cat, 0) + ce)
        elif k == "p" and type(e) is int and (e > 0 or len(at[1]) == 1):
            # single-term bases only stay atomic under a non-real root
            if expand is None:
                expand = []
            expand.append((Poly.from_key(at[1]), e))
        else:
            out[at] = e
    # merged const atoms may need another reduction pass
    for at in [a for a in out if a[0] == "c"]:
        e = out[at]
        if e >= 1 or e == 0:
            del out[at]
            res = _const_pow(at[1], e)
            coef = q(coef * res[0])
            if res[1] is not None:
                out[res[1][0]] = res[1][1]
    if exp_arg is not None and exp_arg.terms:
        out[("e", exp_arg.key)] = 1
    return coef, tuple(sorted(out.items())), expand


def mono_mul(a: Monomial, b: Monomial):
    if not a:
        return 1, b, None
    if not b:
        return 1, a, None
    d = dict(a)
    fix = False
    has_e = any(at[0] == "e" for at, _ in a)
    for at, e in b:
        k = at[0]
        if at in d:
            s = d[at] + e
            if s == 0:
                del d[at]
            else:
                d[at] = q(s)
            if k in "cpe":
                fix = True
        else:
            d[at] = e
            if k == "e" and has_e:
                fix = True
    if not fix:
        return 1, tuple(sorted(d.items())), None
    return _fix(d)


def _mono_degree(m: Monomial) -> object:
    return sum(e for at, e in m if at[0] in "sj")


# ---------------------------------------------------------------------------
# Poly
# ---------------------------------------------------------------------------

class Key(tuple):
    """Sorted term tuple of a Poly with a cached hash.

    Bases of power and exp atoms are stored as keys, so monomials hash
    their nested bases on every dict operation without the cache.
    """

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            self._h = tuple.__hash__(self)
            return self._h


_KEY_CACHE: Dict[tuple, "Poly"] = {}


class Poly:
    """Immutable-by-convention sparse sum of monomials."""

    __slots__ = ("terms", "_key", "_atoms", "_hash")

    def __init__(self, terms: Optional[dict] = None):
        self.terms = terms if terms is not None else {}
        self._key = None
        self._atoms = None
        self._hash = None

    # constructors -----------------------------------------------------------
    @staticmethod
    def const(c) -> "Poly":
        c = q(c)
        return Poly({(): c}) if c != 0 else Poly()

    @staticmethod
    def atom(at: Atom, e=1) -> "Poly":
        if at[0] in "sj":
            return Poly({((at, q(e)),): 1}) if e != 0 else Poly.const(1)
        coef, mono, expand = _fix({at: q(e)})
        p = Poly({mono: coef})
        if expand:
            for base, n in expand:
                p = p * base.pow(n)
        return p

    @staticmethod
    def symbol(name: str) -> "Poly":
        return Poly({((("s", name), 1),): 1})

    @staticmethod
    def jet(dep: str, index: Iterable[str] = ()) -> "Poly":
        return Poly({((jet(dep, index), 1),): 1})

    @staticmethod
    def from_key(key: tuple) -> "Poly":
        p = _KEY_CACHE.get(key)
        if p is None:
            p = Poly(dict(key))
            p._key = key
            if len(_KEY_CACHE) < 200000:
                _KEY_CACHE[key] = p
        return p

    # basic protocol ----------------------------------------------------------
    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = Key(sorted(self.terms.items()))
        return self._key

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        from .expr import from_poly, to_text

        return f"Poly({to_text(from_poly(self))})"

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self):
        if not self.terms:
            return 0
        if self.is_const():
            return self.terms[()]
        raise ValueError("not a constant")

    def atoms(self) -> frozenset:
        """Symbol and jet atoms occurring anywhere, including inside bases."""
        if self._atoms is None:
            s = set()
            for m in self.terms:
                for at, _ in m:
                    k = at[0]
                    if k in "sj":
                        s.add(at)
                    elif k in "pe":
                        s |= Poly.from_key(at[1]).atoms()
            self._atoms = frozenset(s)
        return self._atoms

    def symbols(self) -> frozenset:
        return frozenset(a for a in self.atoms() if a[0] == "s")

    def jets(self) -> frozenset:
        return frozenset(a for a in self.atoms() if a[0] == "j")

    def depends_on(self, atoms) -> bool:
        mine = self.atoms()
        return any(a in mine for a in atoms)

    # arithmetic ----------------------------------------------------------------
    def __add__(self, other):
        other = as_poly(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        d = dict(a)
        for m, c in b.items():
            s = d.get(m)
            if s is None:
                d[m] = c
            else:
                s = q(s + c)
                if s == 0:
                    del d[m]
                else:
                    d[m] = s
        return Poly(d)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-as_poly(other))

    def __rsub__(self, other):
        return as_poly(other) + (-self)

    def scale(self, c) -> "Poly":
        c = q(c)
        if c == 0:
            return Poly()
        if c == 1:
            return self
        return Poly({m: q(v * c) for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = as_poly(other)
        if not self.terms or not other.terms:
            return Poly()
        if len(self.terms) < len(other.terms):
            a, b = self.terms, other.terms
        else:
            a, b = other.terms, self.terms
        acc: dict = {}
        extra = None
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                k, m, expand = mono_mul(m1, m2)
                c = c1 * c2 if k == 1 else c1 * c2 * k
                if expand is not None:
                    t = Poly({m: q(c)})
                    for base, n in expand:
                        t = t * base.pow(n)
                    extra = t if extra is None else extra + t
                    continue
                s = acc.get(m)
                acc[m] = c if s is None else s + c
        out = {}
        for m, c in acc.items():
            if c != 0:
                out[m] = q(c) if type(c) is not int else c
        res = Poly(out)
        return res + extra if extra is not None else res

    __rmul__ = __mul__

    def mul_monomial(self, mono: Monomial, coef=1) -> "Poly":
        return self * Poly({mono: q(coef)})

    def pow(self, r) -> "Poly":
        r = q(Fraction(r)) if not isinstance(r, int) else r
        if type(r) is int and r >= 0:
            result = Poly.const(1)
            base = self
            n = r
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        if not self.terms:
            raise DomainError("zero raised to a negative power")
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            res = _const_pow(c, r)
            if res is None:
                return Poly.atom(("p", self.key), r)
            d: dict = {}
            coef, catom = res
            if catom is not None:
                d[catom[0]] = catom[1]
            for at, e in m:
                ne = q(e * r)
                d[at] = q(d.get(at, 0) + ne) if at in d else ne
            k, mono, expand = _fix(d)
            out = Poly({mono: q(coef * k)})
            if expand:
                for base, n in expand:
                    out = out * base.pow(n)
            return out
        return Poly.atom(("p", self.key), r)

    def __pow__(self, r):
        return self.pow(r)

    def __truediv__(self, other):
        other = as_poly(other)
        if other.is_const():
            c = other.const_value()
            if c == 0:
                raise DomainError("division by zero")
            return self.scale(Fraction(1) / Fraction(c))
        return self * other.pow(-1)

    def __rtruediv__(self, other):
        return as_poly(other) / self

    def inverse_monomial(self) -> "Poly":
        """Reciprocal of a single-term Poly, exact within the normal form."""
        if len(self.terms) != 1:
            raise ValueError("not a single term")
        return self.pow(-1)

    # structural helpers --------------------------------------------------------
    def degree_in(self, at: Atom):
        """Largest exponent of ``at`` over the terms (0 if absent)."""
        best = 0
        for m in self.terms:
            for a, e in m:
                if a == at and e > best:
                    best = e
        return best

    def coeff_of(self, at: Atom, n: int) -> "Poly":
        """Coefficient of ``at**n`` treating ``at`` as a polynomial variable."""
        out = {}
        for m, c in self.terms.items():
            e = 0
            rest = []
            for a, x in m:
                if a == at:
                    e = x
                else:
                    rest.append((a, x))
            if e == n:
                out[tuple(rest)] = c
        return Poly(out)


def as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Poly")


ZERO = Poly()
ONE = Poly.const(1)


def exp(arg: Poly) -> Poly:
    arg = as_poly(arg)
    if not arg.terms:
        return Poly.const(1)
    return Poly({((("e", arg.key), 1),): 1})


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

Rule = Callable[[Atom], Optional[Poly]]


def derive(p: Poly, rule: Rule, _cache: Optional[dict] = None) -> Poly:
    """Apply the derivation determined by ``rule`` on symbol/jet atoms.

    ``rule(atom)`` gives the image of a symbol or jet atom (``None`` = 0);
    ``p``/``e``/``c`` atoms are handled by the chain rule.
    """
    cache = {} if _cache is None else _cache
    acc = Poly()
    direct: dict = {}
    for m, c in p.terms.items():
        for i, (at, e) in enumerate(m):
            k = at[0]
            if k == "c":
                continue
            if k in "sj":
                if at in cache:
                    da = cache[at]
                else:
                    da = rule(at)
                    cache[at] = da
                if da is None or not da.terms:
                    continue
                rest = list(m[:i] + m[i + 1:])
                if e != 1:
                    rest.insert(i, (at, q(e - 1)))
                rest = tuple(rest)
                coef = c * e
                if len(da.terms) == 1:
                    (dm, dc), = da.terms.items()
                    kk, mono, expand = mono_mul(rest, dm)
                    cc = coef * dc * kk
                    if expand is None:
                        s = direct.get(mono)
                        direct[mono] = cc if s is None else s + cc
                        continue
                    acc = acc + Poly({rest: q(coef)}) * da
                else:
                    acc = acc + Poly({rest: q(coef)}) * da
            elif k == "p":
                ck = ("d", at[1])
                db = cache.get(ck)
                if db is None:
                    db = derive(Poly.from_key(at[1]), rule, cache)
                    cache[ck] = db
                if not db.terms:
                    continue
                rest = m[:i] + m[i + 1:]
                base = Poly.from_key(at[1])
                acc = acc + Poly({rest: q(c * e)}) * base.pow(q(e - 1)) * db
            elif k == "e":
                ck = ("d", at[1])
                da = cache.get(ck)
                if da is None:
                    da = derive(Poly.from_key(at[1]), rule, cache)
                    cache[ck] = da
                if not da.terms:
                    continue
                acc = acc + Poly({m: c}) * da
    out = {mo: q(v) for mo, v in direct.items() if v != 0}
    return Poly(out) + acc


def diff(p: Poly, at: Atom) -> Poly:
    """Partial derivative with respect to a symbol or jet atom."""
    if at not in p.atoms():
        return Poly()
    one = Poly.const(1)
    return derive(p, lambda a: one if a == at else None)


def total_derivative(p: Poly, var: str, max_order: Optional[int] = None,
                     extra: Optional[Rule] = None) -> Poly:
    """Total derivative D_var: x_var -> 1 and jets gain the index ``var``."""
    one = Poly.const(1)
    target = ("s", var)

    def rule(a):
        if a == target:
            return one
        if a[0] == "j":
            idx = tuple(sorted(a[2] + (var,)))
            if max_order is not None and len(idx) > max_order:
                raise JetOrderOverflow(
                    f"D_{var} of {a[1]}_{''.join(a[2])} exceeds jet order {max_order}")
            return Poly({((("j", a[1], idx), 1),): 1})
        if extra is not None:
            return extra(a)
        return None

    return derive(p, rule)


# ---------------------------------------------------------------------------
# substitution
# ---------------------------------------------------------------------------

def subs(p: Poly, mapping: Dict[Atom, Poly]) -> Poly:
    """Simultaneous replacement of symbol/jet atoms, then normalization."""
    if not mapping or not p.terms:
        return p
    keys = frozenset(mapping)
    cache: dict = {}

    def touched(at):
        k = at[0]
        if k in "sj":
            return at in keys
        if k in "pe":
            return bool(Poly.from_key(at[1]).atoms() & keys)
        return False

    def image(at, e):
        ck = (at, e)
        r = cache.get(ck)
        if r is not None:
            return r
        k = at[0]
        if k in "sj":
            r = as_poly(mapping[at]).pow(e)
        elif k == "p":
            r = subs(Poly.from_key(at[1]), mapping).pow(e)
        else:
            r = exp(subs(Poly.from_key(at[1]), mapping).scale(e))
        cache[ck] = r
        return r

    out = Poly()
    keep: dict = {}
    for m, c in p.terms.items():
        moved = [(at, e) for at, e in m if touched(at)]
        if not moved:
            keep[m] = c
            continue
        rest = tuple((at, e) for at, e in m if not touched(at))
        t = Poly({rest: c})
        for at, e in moved:
            t = t * image(at, e)
            if not t.terms:
                break
        out = out + t
    return Poly(keep) + out


# ---------------------------------------------------------------------------
# coefficient collection
# ---------------------------------------------------------------------------

def collect(p: Poly, variables: Iterable[Atom]) -> Dict[Monomial, Poly]:
    """Group terms by their monomial in ``variables``."""
    vs = frozenset(variables)
    out: Dict[Monomial, dict] = {}
    for m, c in p.terms.items():
        key = []
        rest = []
        for at, e in m:
            if at in vs:
                if type(e) is not int or e < 0:
                    raise NotPolynomial(f"{at} appears with exponent {e}")
                key.append((at, e))
            else:
                if at[0] in "pe" and Poly.from_key(at[1]).atoms() & vs:
                    raise NotPolynomial(f"collected variable inside {at[0]}-atom")
                rest.append((at, e))
        out.setdefault(tuple(key), {})[tuple(rest)] = c
    return {k: Poly(v) for k, v in sorted(out.items())}


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

def _npow(v, e, mode):
    if type(e) is int:
        if e < 0 and v == 0:
            raise DomainError("division by zero")
        return v**e
    # fractional exponent
    if v == 0:
        if e < 0:
            raise DomainError("division by zero")
        return v * 0
    if mode == "exact" and isinstance(v, (int, Fraction)):
        fv = Fraction(v)
        if fv > 0:
            root = exact_root(fv, e.denominator)
            if root is not None:
                return root**e.numerator
        elif e.denominator % 2 == 1:
            root = exact_root(-fv, e.denominator)
            if root is not None:
                return (-root) ** e.numerator
    if v < 0:
        if e.denominator % 2 == 0:
            raise DomainError(f"even root of negative value {v}")
        mag = _real_pow(-v, e)
        return -mag if e.numerator % 2 else mag
    return _real_pow(v, e)


def _real_pow(v, e):
    try:
        import mpmath

        if isinstance(v, mpmath.mpf):
            return mpmath.power(v, mpmath.mpf(e.numerator) / e.denominator)
    except ImportError:  # pragma: no cover
        pass
    return float(v) ** (e.numerator / e.denominator)


def _nexp(v):
    if v == 0:
        return 1
    try:
        import mpmath

        if isinstance(v, mpmath.mpf):
            return mpmath.exp(v)
    except ImportError:  # pragma: no cover
        pass
    return math.exp(float(v))


def evaluate(p: Poly, values: Dict[Atom, object], mode: str = "exact"):
    """Numeric value of ``p``.

    ``mode='exact'`` keeps Fractions as long as every power resolves to a
    rational and falls back to float otherwise; ``'float'`` uses IEEE double;
    ``'mp'`` expects mpmath numbers in ``values``.
    """
    if mode == "float":
        values = {k: float(v) for k, v in values.items()}
        conv = float
    elif mode == "mp":
        import mpmath

        values = {k: (v if isinstance(v, mpmath.mpf) else mpmath.mpf(v) if not isinstance(v, Fraction)
                      else mpmath.mpf(v.numerator) / v.denominator) for k, v in values.items()}

        def conv(c):
            c = Fraction(c)
            return mpmath.mpf(c.numerator) / c.denominator
    else:
        conv = Fraction
    cache: dict = {}

    def atom_value(at):
        if at in cache:
            return cache[at]
        k = at[0]
        if k in "sj":
            try:
                v = values[at]
            except KeyError:
                raise KeyError(f"no value bound for {at}") from None
        elif k == "c":
            v = conv(at[1])
        elif k == "p":
            v = evaluate_inner(Poly.from_key(at[1]))
        else:
            v = _nexp(evaluate_inner(Poly.from_key(at[1])))
        cache[at] = v
        return v

    def exact_roots(pairs):
        # prod v_i^(p_i/q_i) as one rational root when possible, else None
        den = math.lcm(*(e.denominator for _, e in pairs))
        radicand = Fraction(1)
        for v, e in pairs:
            if not isinstance(v, (int, Fraction)) or v <= 0:
                return None
            radicand *= Fraction(v) ** int(e * den)
        return exact_root(radicand, den)

    def evaluate_inner(poly):
        total = conv(0)
        for m, c in poly.terms.items():
            t = conv(c)
            frac = []
            for at, e in m:
                v = atom_value(at)
                if mode == "exact" and type(e) is not int:
                    frac.append((v, e))
                else:
                    t = t * _npow(v, e, mode)
            if frac:
                r = exact_roots(frac) if len(frac) > 1 else None
                if r is not None:
                    t = t * r
                else:
                    for v, e in frac:
                        t = t * _npow(v, e, mode)
            total = total + t
        return total

    return evaluate_inner(p)


def term_values(p: Poly, values: Dict[Atom, object], mode: str = "float") -> list:
    """Values of the individual terms (used for residual scales)."""
    return [evaluate(Poly({m: c}), values, mode) for m, c in p.terms.items()]
