from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from lieze import linalg
from lieze.fuzz import naive_rref

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def matrices(draw):
    m = draw(st.integers(1, 6))
    n = draw(st.integers(1, 7))
    rows = [draw(st.lists(rationals | st.just(Fraction(0)), min_size=n, max_size=n)) for _ in range(m)]
    if m > 1 and draw(st.booleans()):
        rows[-1] = [2 * a - b for a, b in zip(rows[0], rows[1])]
    return rows


def test_zero_matrix_nullspace():
    basis = linalg.nullspace([[0, 0, 0]], 3)
    assert len(basis) == 3
    assert linalg.rank([[0, 0, 0]], 3) == 0


def test_identity_nullspace_is_empty():
    assert linalg.nullspace([[1, 0], [0, 1]], 2) == []


def test_known_rref():
    R, piv = linalg.rref([[2, 4, 6], [1, 2, 4]], 3)
    assert piv == [0, 2]
    assert R == [[1, 2, 0], [0, 0, 1]]
    assert linalg.nullspace([[2, 4, 6], [1, 2, 4]], 3) == [[Fraction(1), Fraction(-1, 2), Fraction(0)]]


@settings(max_examples=500, deadline=None)
@given(matrices())
def test_rref_matches_bruteforce(m):
    n = len(m[0])
    assert linalg.rref(m, n) == naive_rref(m)


@settings(max_examples=500, deadline=None)
@given(matrices())
def test_nullspace_back_substitution(m):
    n = len(m[0])
    basis = linalg.nullspace(m, n)
    assert len(basis) == n - linalg.rank(m, n)
    for v in basis:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)


def test_solve():
    cols = [[1, 0, 1], [0, 1, 1]]
    assert linalg.solve(cols, [2, 3, 5]) == [2, 3]
    assert linalg.solve(cols, [2, 3, 4]) is None
