"""Independent 50-digit residual oracle for the sec33b radical candidate.

Uses sympy only (none of lieze) and writes lieze/data/oracle_sec33b.json.
Run once: ``python tests/oracles/sec33b_oracle.py``.
"""

import json
from pathlib import Path

import sympy as sp

x, y, t = sp.symbols("x y t", positive=True)
a1, as1, as2 = 1, 2, 1
u = sp.sqrt(sp.Rational(a1) * t / (6 * x**2 * (as1 * y + as2)))

ux, ut = sp.diff(u, x), sp.diff(u, t)
uxt, uxy, uxx, utt = sp.diff(u, x, t), sp.diff(u, x, y), sp.diff(u, x, 2), sp.diff(u, t, 2)
uxyt, uxxy = sp.diff(u, x, y, t), sp.diff(u, x, 2, y)
uxytt, uxxxy = sp.diff(u, x, y, t, 2), sp.diff(u, x, 3, y)

# expanded left side, term by term
terms = [
    4 * u**5 * uxt, 4 * u**4 * ux * ut, u**3 * uxytt, -u**3 * uxxxy,
    2 * u**2 * ux * uxxy, u**2 * uxx * uxy, -2 * u**2 * ut * uxyt, -u**2 * utt * uxy,
    2 * u * ut**2 * uxy, -2 * u * ux**2 * uxy,
]

POINTS = [(1, 1, 1), (2, 3, 5), (sp.Rational(3, 2), 2, sp.Rational(7, 3)), (3, 1, 2),
          (sp.Rational(5, 4), sp.Rational(9, 4), sp.Rational(11, 5))]
DIGITS = 50

rows = []
for px, py, pt in POINTS:
    sub = {x: px, y: py, t: pt}
    vals = [sp.N(term.subs(sub), DIGITS) for term in terms]
    r = sp.N(sum(term.subs(sub) for term in terms), DIGITS)
    scale = max(abs(v) for v in vals)
    rows.append({"point": {"x": str(px), "y": str(py), "t": str(pt)},
                 "residual": str(r), "scale": str(scale), "normalized": str(sp.N(r / scale, DIGITS))})

out = {"candidate": "sec33b", "bindings": {"a1": "1", "as1": "2", "as2": "1"}, "digits": DIGITS,
       "tolerance": "1e-9", "points": rows,
       "verdict": "PASS" if all(abs(sp.Float(r["normalized"], DIGITS)) <= 1e-9 for r in rows) else "FAIL"}
path = Path(__file__).resolve().parents[2] / "src" / "lieze" / "data" / "oracle_sec33b.json"
path.write_text(json.dumps(out, indent=2) + "\n")
print(json.dumps(out, indent=2))
