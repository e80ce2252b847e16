"""Text front end: expressions and problem files.

Expression grammar (precedence ``^`` > unary ``-`` > ``* /`` > ``+ -``)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | NAME | NAME "(" args ")" | "(" expr ")"

Functions: ``exp(e)``, ``sqrt(e)`` and ``D(f, v1, v2, ...)`` for jet
coordinates.  Exponents must reduce to rational constants and implicit
multiplication (``2x``) is rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .expr import Const, Exp, Expr, Jet, Pow, Add, Mul, Symbol, to_poly

KNOWN_FUNCTIONS = ("exp", "sqrt", "D")


class LieSyntaxError(SyntaxError):
    """Syntax error carrying 1-based ``lineno`` and ``offset`` (column)."""

    def __init__(self, msg: str, line: int, col: int, text: str = ""):
        super().__init__(msg, ("<input>", line, col, text))
        self.msg = msg
        self.lineno = line
        self.offset = col

    def __str__(self):
        return f"line {self.lineno}, column {self.offset}: {self.msg}"


class UnknownSymbol(ValueError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        super().__init__(f"unknown symbol '{name}' at line {line}, column {col}")
        self.name = name
        self.lineno = line
        self.offset = col


class UnsupportedFunction(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unsupported function '{name}'")
        self.name = name


class ValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1, col0: int = 1) -> List[Token]:
    tokens = []
    pos = 0
    line, col = line0, col0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LieSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            tokens.append(Token(kind, s, line, col))
        for ch in s:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        pos = m.end()
    tokens.append(Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# expression parser
# ---------------------------------------------------------------------------

@dataclass
class Scope:
    """Name resolution for one parse.

    ``symbols=None`` accepts any name as a Symbol (free mode).  Names in
    ``functions`` are dependent variables and become order-0 jet coordinates;
    ``values`` substitutes bound constants at parse time.
    """

    symbols: Optional[frozenset] = None
    functions: Dict[str, Optional[Tuple[str, ...]]] = field(default_factory=lambda: {"u": None})
    values: Dict[str, Fraction] = field(default_factory=dict)


class _Parser:
    def __init__(self, tokens: List[Token], scope: Scope):
        self.toks = tokens
        self.i = 0
        self.scope = scope

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return LieSyntaxError(msg, tok.line, tok.col)

    def expect(self, text):
        if self.tok.text != text or self.tok.kind not in ("op",):
            raise self.error(f"expected '{text}', found {self.tok.text or 'end of input'!r}")
        self.i += 1

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            if self.tok.kind in ("num", "name") or self.tok.text == "(":
                raise self.error("implicit multiplication is not allowed; use '*'")
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            t = self.term()
            terms.append(t if op == "+" else Mul((Const(-1), t)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            f = self.unary()
            factors.append(f if op == "*" else Pow(f, Fraction(-1)))
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Mul((Const(-1), inner))
        if self.tok.kind == "op" and self.tok.text == "+":
            self.i += 1
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            tok = self.tok
            self.i += 1
            start = self.tok
            ex = self.unary()
            p = to_poly(ex)
            if not p.is_const():
                raise LieSyntaxError("exponent must be a rational constant", start.line, start.col)
            return Pow(base, Fraction(p.const_value()))
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(Fraction(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            if self.tok.kind == "op" and self.tok.text == ")":
                raise self.error("empty parentheses")
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.i += 1
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(tok)
            return self.name(tok)
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok.text!r}")

    def name(self, tok: Token) -> Expr:
        n = tok.text
        sc = self.scope
        if n in sc.values:
            return Const(sc.values[n])
        if n in sc.functions:
            return Jet(n, ())
        if n in KNOWN_FUNCTIONS:
            raise self.error(f"function '{n}' used without arguments", tok)
        if sc.symbols is not None and n not in sc.symbols:
            raise UnknownSymbol(n, tok.line, tok.col)
        return Symbol(n)

    def call(self, tok: Token) -> Expr:
        fname = tok.text
        self.expect("(")
        if fname == "D":
            return self.derivative(tok)
        if fname not in ("exp", "sqrt"):
            raise UnsupportedFunction(fname)
        if self.tok.kind == "op" and self.tok.text == ")":
            raise self.error(f"{fname}() needs one argument")
        arg = self.expr()
        if self.tok.kind == "op" and self.tok.text == ",":
            raise self.error(f"{fname}() takes one argument")
        self.expect(")")
        if fname == "exp":
            return Exp(arg)
        return Pow(arg, Fraction(1, 2))

    def derivative(self, tok: Token) -> Expr:
        ftok = self.tok
        if ftok.kind != "name":
            raise self.error("D(...) expects a dependent variable name first")
        dep = ftok.text
        if dep not in self.scope.functions:
            raise UnknownSymbol(dep, ftok.line, ftok.col) if self.scope.symbols is not None \
                else self.error(f"'{dep}' is not a dependent variable", ftok)
        self.i += 1
        allowed = self.scope.functions[dep]
        index = []
        while self.tok.kind == "op" and self.tok.text == ",":
            self.i += 1
            vt = self.tok
            if vt.kind != "name":
                raise self.error("expected a variable name in D(...)")
            if allowed is not None and vt.text not in allowed:
                raise self.error(f"'{vt.text}' is not an independent variable of {dep}", vt)
            index.append(vt.text)
            self.i += 1
        self.expect(")")
        return Jet(dep, tuple(index))


def parse_expression(text: str, scope: Optional[Scope] = None, line: int = 1, col: int = 1) -> Expr:
    """Parse one expression; in free mode every name is a Symbol and ``u``
    is the dependent variable."""
    return _Parser(tokenize(text, line, col), scope or Scope()).parse()


def parse_rational(text: str) -> Fraction:
    p = to_poly(parse_expression(text, Scope(symbols=frozenset(), functions={})))
    if not p.is_const():
        raise ValueError(f"not a rational constant: {text}")
    return Fraction(p.const_value())


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

RESERVED_WORDS = frozenset({"D", "exp", "sqrt", "reference", "bind", "stage2"})


@dataclass
class Settings:
    seed: int = 42
    tol: float = 1e-9
    points: int = 20
    exclude: Tuple[str, ...] = ()
    box: Tuple[Fraction, Fraction] = (Fraction(1), Fraction(3))

    def as_dict(self) -> dict:
        return {"seed": self.seed, "tol": self.tol, "points": self.points,
                "exclude": list(self.exclude), "box": [str(self.box[0]), str(self.box[1])]}


@dataclass
class CandidateSolution:
    name: str
    expression: Optional[Expr]
    bindings: Dict[str, Fraction] = field(default_factory=dict)
    unsupported: Optional[str] = None
    text: str = ""


@dataclass
class SubstitutionBlock:
    """Raw change of variables as written (resolved by :mod:`lieze.reduction`)."""

    name: str
    old_variables: Tuple[str, ...]
    old_dependent: str
    new_variables: Tuple[str, ...]
    definitions: Tuple[Expr, ...]
    new_dependent: str
    form: Expr
    bindings: Dict[str, Fraction]
    reference: Optional[Expr] = None
    reference_text: str = ""
    stage2: Optional["SubstitutionBlock"] = None


@dataclass
class ProblemSpec:
    independent: Tuple[str, ...]
    dependent: str
    constants: Tuple[str, ...]
    equation: Optional[Expr]
    leading: Optional[Jet]
    ansatz: Tuple[int, int] = (2, 1)
    max_order: Optional[int] = None
    substitutions: Dict[str, SubstitutionBlock] = field(default_factory=dict)
    solutions: Dict[str, CandidateSolution] = field(default_factory=dict)
    fields: Dict[str, Tuple[Expr, ...]] = field(default_factory=dict)
    infinitesimals: Optional[Tuple[Expr, ...]] = None
    table: Optional[Dict[str, Tuple[Expr, ...]]] = None
    settings: Settings = field(default_factory=Settings)
    explicit_ansatz: bool = False

    def scope(self, extra=(), values=None) -> Scope:
        return Scope(symbols=frozenset(self.independent) | frozenset(self.constants) | frozenset(extra),
                     functions={self.dependent: self.independent}, values=dict(values or {}))


class _Chunk:
    """A directive's text plus the mapping from offsets to line/column."""

    def __init__(self, text: str, line: int, col: int):
        self.text = text
        self.line = line
        self.col = col

    def loc(self, offset: int) -> Tuple[int, int]:
        before = self.text[:offset]
        nl = before.count("\n")
        if nl == 0:
            return self.line, self.col + offset
        return self.line + nl, offset - before.rfind("\n")

    def error(self, msg: str, offset: int = 0) -> LieSyntaxError:
        line, col = self.loc(offset)
        return LieSyntaxError(msg, line, col)

    def expr(self, start: int, end: int, scope: Scope) -> Expr:
        line, col = self.loc(start)
        return parse_expression(self.text[start:end], scope, line, col)


def _strip_comments(text: str) -> str:
    out = []
    for line in text.split("\n"):
        in_q = False
        cut = len(line)
        for i, ch in enumerate(line):
            if ch == '"':
                in_q = not in_q
            elif ch == "#" and not in_q:
                cut = i
                break
        out.append(line[:cut] + " " * (len(line) - cut))
    return "\n".join(out)


def _directives(text: str) -> List[_Chunk]:
    clean = _strip_comments(text)
    chunks = []
    i, n = 0, len(clean)
    line, col = 1, 1

    def advance(k):
        nonlocal i, line, col
        for ch in clean[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        if clean[i] in " \t\r\n":
            advance(1)
            continue
        start, sline, scol = i, line, col
        depth = 0
        buf = []
        while i < n:
            ch = clean[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    raise LieSyntaxError("unbalanced '}'", line, col)
            elif ch == "\\" and clean[i + 1:].split("\n", 1)[0].strip() == "":
                # continuation: swallow the rest of the line and its newline
                nl = clean.find("\n", i)
                k = (nl if nl >= 0 else n) - i + (1 if nl >= 0 else 0)
                buf.append(" " * (k - 1) + ("\n" if nl >= 0 else " "))
                advance(k)
                continue
            elif ch == "\n" and depth == 0:
                break
            buf.append(ch)
            advance(1)
        if depth > 0:
            raise LieSyntaxError("unterminated '{' block", sline, scol)
        chunks.append(_Chunk("".join(buf), sline, scol))
    return chunks


def _split_statements(chunk: _Chunk, start: int, end: int) -> List[Tuple[int, int]]:
    """Top-level ';'-separated statements in ``chunk.text[start:end]``."""
    out = []
    depth = 0
    s = start
    for i in range(start, end):
        ch = chunk.text[i]
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        elif ch == ";" and depth == 0:
            out.append((s, i))
            s = i + 1
    out.append((s, end))
    return [(a, b) for a, b in out if chunk.text[a:b].strip()]


def _trim(chunk: _Chunk, a: int, b: int) -> Tuple[int, int]:
    t = chunk.text
    while a < b and t[a].isspace():
        a += 1
    while b > a and t[b - 1].isspace():
        b -= 1
    return a, b


def _block(chunk: _Chunk, after: int, end: Optional[int] = None) -> Tuple[str, int, int]:
    """Parse ``NAME { ... }`` in ``chunk.text[after:end]``; returns name and body span."""
    t = chunk.text
    end = len(t) if end is None else end
    ob = t.find("{", after, end)
    if ob < 0:
        raise chunk.error("expected '{'", after)
    name = t[after:ob].strip()
    depth = 0
    cb = -1
    for i in range(ob, end):
        if t[i] == "{":
            depth += 1
        elif t[i] == "}":
            depth -= 1
            if depth == 0:
                cb = i
                break
    if cb < 0:
        raise chunk.error("unterminated '{' block", ob)
    if t[cb + 1:end].strip():
        raise chunk.error("unexpected text after '}'", cb + 1)
    return name, ob + 1, cb


def _assignment(chunk: _Chunk, a: int, b: int) -> Tuple[str, int, int]:
    t = chunk.text
    eq = t.find("=", a, b)
    if eq < 0:
        raise chunk.error("expected 'name = expression'", a)
    lhs = t[a:eq].strip()
    if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", lhs):
        raise chunk.error(f"invalid assignment target {lhs!r}", a)
    return lhs, eq + 1, b


def _bindings(chunk: _Chunk, a: int, b: int) -> Dict[str, Fraction]:
    out = {}
    body = chunk.text[a:b]
    for part in body.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise chunk.error(f"expected name=value in bind, got {part.strip()!r}", a)
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = parse_rational(v.strip())
        except (ValueError, SyntaxError):
            raise chunk.error(f"bind value must be a rational constant: {v.strip()!r}", a) from None
    return out


def _names_in(text: str) -> List[str]:
    return [t.text for t in tokenize(text) if t.kind == "name"]


def _parse_substitution(chunk, a, b, name, old_vars, old_dep, constants, inherited) -> SubstitutionBlock:
    stmts = _split_statements(chunk, a, b)
    binds = dict(inherited)
    assigns = []
    stage2_span = None
    for s, e in stmts:
        s, e = _trim(chunk, s, e)
        word = chunk.text[s:e].split(None, 1)[0].split("{")[0]
        if word == "bind":
            binds.update(_bindings(chunk, s + 4, e))
        elif word == "stage2":
            stage2_span = (s + len("stage2"), e)
        else:
            assigns.append(_assignment(chunk, s, e))
    form_span = None
    ref_span = None
    defs = []
    for lhs, s, e in assigns:
        if lhs == old_dep:
            form_span = (s, e)
        elif lhs == "reference":
            ref_span = (s, e)
        elif lhs in old_vars or lhs in constants:
            raise chunk.error(f"cannot redefine '{lhs}' in a substitution", s)
        else:
            defs.append((lhs, s, e))
    if form_span is None:
        raise chunk.error(f"substitution '{name}' must define {old_dep}", a)
    if not defs:
        raise chunk.error(f"substitution '{name}' defines no new variables", a)
    new_vars = tuple(d[0] for d in defs)
    known = set(old_vars) | set(constants) | set(new_vars) | set(binds) | set(KNOWN_FUNCTIONS)
    cands = sorted({n for n in _names_in(chunk.text[form_span[0]:form_span[1]]) if n not in known})
    if len(cands) != 1:
        raise chunk.error(f"cannot identify the new function in '{old_dep} = ...' (candidates: {cands})",
                          form_span[0])
    new_dep = cands[0]
    def_scope = Scope(symbols=frozenset(old_vars) | frozenset(constants), functions={}, values=binds)
    definitions = tuple(chunk.expr(s, e, def_scope) for _, s, e in defs)
    form_scope = Scope(symbols=frozenset(old_vars) | frozenset(constants) | frozenset(new_vars),
                       functions={new_dep: new_vars}, values=binds)
    form = chunk.expr(form_span[0], form_span[1], form_scope)
    reference = None
    ref_text = ""
    if ref_span is not None:
        ref_scope = Scope(symbols=frozenset(new_vars) | frozenset(constants),
                          functions={new_dep: new_vars}, values=binds)
        reference = chunk.expr(ref_span[0], ref_span[1], ref_scope)
        ref_text = " ".join(chunk.text[ref_span[0]:ref_span[1]].split())
    stage2 = None
    if stage2_span is not None:
        _, ba, bb = _block(chunk, stage2_span[0], stage2_span[1])
        stage2 = _parse_substitution(chunk, ba, bb, f"{name}/stage2", new_vars, new_dep, constants, binds)
    return SubstitutionBlock(name, tuple(old_vars), old_dep, new_vars, definitions, new_dep, form,
                             {k: v for k, v in binds.items()}, reference, ref_text, stage2)


def _parse_settings(chunk: _Chunk, a: int) -> Settings:
    import shlex

    st = Settings()
    try:
        parts = shlex.split(chunk.text[a:])
    except ValueError as exc:
        raise chunk.error(f"bad settings: {exc}", a) from None
    excl = []
    i = 0
    while i < len(parts):
        p = parts[i]
        if p == "exclude":
            if i + 1 >= len(parts):
                raise chunk.error("exclude needs a predicate", a)
            excl.append(parts[i + 1])
            i += 2
            continue
        if "=" not in p:
            raise chunk.error(f"unknown setting {p!r}", a)
        k, v = p.split("=", 1)
        try:
            if k == "seed":
                st.seed = int(v)
            elif k == "tol":
                st.tol = float(v)
            elif k == "points":
                st.points = int(v)
            elif k == "box":
                lo, hi = v.split(",")
                st.box = (parse_rational(lo), parse_rational(hi))
            else:
                raise chunk.error(f"unknown setting {k!r}", a)
        except ValueError:
            raise chunk.error(f"bad value for {k}: {v!r}", a) from None
        i += 1
    st.exclude = tuple(excl)
    return st


def parse_problem(text: str, require_equation: bool = True) -> ProblemSpec:
    """Parse a problem file into a :class:`ProblemSpec`.

    Raises LieSyntaxError / UnknownSymbol for malformed text and
    ValidationError for semantically invalid problems.
    """
    independent: Tuple[str, ...] = ()
    dependent = None
    constants: List[str] = []
    pending = []
    for ch in _directives(text):
        m = re.match(r"\s*([A-Za-z_][A-Za-z_0-9]*)", ch.text)
        if not m:
            raise ch.error("expected a directive keyword")
        kw = m.group(1)
        rest = m.end()
        if kw == "independent":
            independent = tuple(ch.text[rest:].split())
        elif kw == "dependent":
            names = ch.text[rest:].split()
            if len(names) != 1:
                raise ValidationError("exactly one dependent variable is required")
            dependent = names[0]
        elif kw == "constant":
            constants.extend(ch.text[rest:].replace(",", " ").split())
        else:
            pending.append((kw, rest, ch))
    if not independent:
        raise ValidationError("no independent variables declared")
    if dependent is None:
        raise ValidationError("no dependent variable declared")
    declared = list(independent) + [dependent] + constants
    for n in declared:
        if n.startswith("_") or n in RESERVED_WORDS:
            raise ValidationError(f"reserved name '{n}'")
    if len(set(declared)) != len(declared):
        raise ValidationError("a name is declared twice")

    spec = ProblemSpec(independent, dependent, tuple(constants), None, None)
    scope = spec.scope()
    field_names: List[str] = []
    for kw, rest, ch in pending:
        body = ch.text[rest:]
        if kw == "equation":
            if not body.strip():
                raise ValidationError("empty equation")
            spec.equation = ch.expr(rest, len(ch.text), scope)
        elif kw == "leading":
            e = ch.expr(rest, len(ch.text), scope)
            if not isinstance(e, Jet):
                raise ch.error("leading must be a derivative D(u, ...)", rest)
            spec.leading = e
        elif kw == "ansatz":
            d = dict(p.split("=", 1) for p in body.split() if "=" in p)
            try:
                spec.ansatz = (int(d.get("indep_degree", 2)), int(d.get("dep_degree", 1)))
            except ValueError:
                raise ch.error("ansatz degrees must be integers", rest) from None
            spec.explicit_ansatz = True
        elif kw == "max_order":
            try:
                spec.max_order = int(body.strip())
            except ValueError:
                raise ch.error("max_order must be an integer", rest) from None
        elif kw == "settings":
            spec.settings = _parse_settings(ch, rest)
        elif kw == "substitution":
            name, a, b = _block(ch, rest)
            if not name:
                raise ch.error("substitution needs a name", rest)
            spec.substitutions[name] = _parse_substitution(
                ch, a, b, name, independent, dependent, constants, {})
        elif kw == "solution":
            name, a, b = _block(ch, rest)
            spec.solutions[name] = _parse_solution(ch, a, b, name, spec)
        elif kw in ("field", "infinitesimals"):
            name, a, b = _block(ch, rest)
            comps = _parse_components(ch, a, b, spec)
            if kw == "field":
                spec.fields[name] = comps
                field_names.append(name)
            else:
                spec.infinitesimals = comps
        elif kw == "table":
            pending_table = (ch, rest)
            spec.table = {}  # filled after all fields are known
            spec._table_src = pending_table  # type: ignore[attr-defined]
        else:
            raise ch.error(f"unknown directive '{kw}'")
    if spec.table is not None:
        ch, rest = spec._table_src  # type: ignore[attr-defined]
        del spec._table_src  # type: ignore[attr-defined]
        spec.table = _parse_table(ch, rest, field_names)
    _validate(spec, require_equation)
    return spec


def _parse_solution(ch, a, b, name, spec) -> CandidateSolution:
    expr_span = None
    binds = {}
    for s, e in _split_statements(ch, a, b):
        s, e = _trim(ch, s, e)
        if ch.text[s:e].split(None, 1)[0] == "bind":
            binds.update(_bindings(ch, s + 4, e))
            continue
        lhs, es, ee = _assignment(ch, s, e)
        if lhs != spec.dependent:
            raise ch.error(f"solution must assign {spec.dependent}", s)
        expr_span = (es, ee)
    if expr_span is None:
        raise ch.error(f"solution '{name}' has no '{spec.dependent} = ...'", a)
    text = " ".join(ch.text[expr_span[0]:expr_span[1]].split())
    sc = Scope(symbols=frozenset(spec.independent) | frozenset(spec.constants), functions={})
    try:
        e = ch.expr(expr_span[0], expr_span[1], sc)
    except UnsupportedFunction as exc:
        return CandidateSolution(name, None, binds, exc.name, text)
    return CandidateSolution(name, e, binds, None, text)


def _parse_components(ch, a, b, spec) -> Tuple[Expr, ...]:
    comps = {n: Const(0) for n in spec.independent + (spec.dependent,)}
    for s, e in _split_statements(ch, a, b):
        s, e = _trim(ch, s, e)
        lhs, es, ee = _assignment(ch, s, e)
        if lhs not in comps:
            raise ch.error(f"'{lhs}' is not a coordinate", s)
        comps[lhs] = ch.expr(es, ee, spec.scope())
    return tuple(comps[n] for n in spec.independent + (spec.dependent,))


def _parse_table(ch, rest, field_names) -> Dict[str, Tuple[Expr, ...]]:
    _, a, b = _block(ch, rest)
    sc = Scope(symbols=frozenset(field_names), functions={})
    table = {}
    for s, e in _split_statements(ch, a, b):
        s, e = _trim(ch, s, e)
        colon = ch.text.find(":", s, e)
        if colon < 0:
            raise ch.error("table rows look like 'V1: e1, e2, ...'", s)
        label = ch.text[s:colon].strip()
        if label not in field_names:
            raise ch.error(f"unknown field '{label}' in table", s)
        entries = []
        pos = colon + 1
        for part in ch.text[colon + 1:e].split(","):
            entries.append(ch.expr(pos, pos + len(part), sc))
            pos += len(part) + 1
        if len(entries) != len(field_names):
            raise ch.error(f"row {label} has {len(entries)} entries, expected {len(field_names)}", s)
        table[label] = tuple(entries)
    return table


def _validate(spec: ProblemSpec, require_equation: bool) -> None:
    if spec.equation is None:
        if require_equation:
            raise ValidationError("problem has no equation")
        return
    p = to_poly(spec.equation)
    if p.is_zero():
        raise ValidationError("equation is identically zero")
    if spec.leading is not None:
        if spec.leading.dep != spec.dependent:
            raise ValidationError("leading derivative must be of the dependent variable")
        at = ("j", spec.leading.dep, spec.leading.index)
        if at not in p.atoms():
            raise ValidationError(f"leading derivative {spec.leading.dep}_{''.join(spec.leading.index)} "
                                  "does not occur in the equation")
        if p.coeff_of(at, 1).is_zero():
            raise ValidationError("leading derivative has zero coefficient")
    order = max((len(a[2]) for a in p.jets()), default=0)
    if spec.max_order is None:
        spec.max_order = order
    elif spec.max_order < order:
        raise ValidationError(f"equation order {order} exceeds max_order {spec.max_order}")
