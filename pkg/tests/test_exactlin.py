from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from mbases.bruteforce import minor_rank
from mbases.exactlin import (GF, QQ, DimensionMismatch, Field, SingularBasis, coords_in_basis, coords_in_span,
                             extract_spanning_subset, quotient_coords, rank, rref, span)


def test_field_parse_and_coercion():
    assert Field.parse("Q") == QQ
    assert Field.parse("GF(3)") == GF(3) == Field.parse("f3")
    assert GF(5)("2/3") == 4  # 3 * 4 = 12 = 2 mod 5
    assert QQ("-3/4") == Fraction(-3, 4)
    with pytest.raises(ValueError):
        GF(4)
    with pytest.raises(ZeroDivisionError):
        GF(3)(Fraction(1, 3))
    with pytest.raises(ValueError):
        Field.parse("R")


def test_rref_rationals():
    rows, piv = rref([[2, 4, 6], [1, 2, 4]], QQ)
    assert piv == [0, 2]
    assert rows == [[1, 2, 0], [0, 0, 1]]


def test_rank_depends_on_field():
    # det = 2: invertible over Q and GF(3), singular over GF(2)
    m = [[1, 1], [1, -1]]
    assert rank(m, QQ) == 2
    assert rank(m, GF(3)) == 2
    assert rank(m, GF(2)) == 1


def test_ragged_rows_rejected():
    with pytest.raises(DimensionMismatch):
        rref([[1, 2], [1]], QQ)


def test_span_membership_and_equality():
    U = span([(1, 0, 1), (0, 1, 1)], QQ)
    assert U.dim == 2
    assert (1, 1, 2) in U
    assert (0, 0, 1) not in U
    assert U == span([(1, 1, 2), (1, -1, 0)], QQ)
    assert span([], QQ, 3).dim == 0
    assert U.contains_space(span([(2, 2, 4)], QQ))


def test_coords():
    assert coords_in_span((3, 5), [(1, 1), (0, 1)]) == [3, 2]
    assert coords_in_span((1, 0, 0), [(0, 1, 0)]) is None
    with pytest.raises(SingularBasis):
        coords_in_basis((1, 1), [(1, 1), (2, 2)])


def test_extract_spanning_subset_skips_dependent_and_zero():
    assert extract_spanning_subset([(0, 0), (1, 2), (2, 4), (0, 1)]) == [1, 3]


def test_quotient_coords():
    U = span([(1, 0, 0)], QQ)
    assert quotient_coords((5, 2, 3), U) == (2, 3)
    assert quotient_coords((1, 0, 0), U) == (0, 0)


small = st.integers(-3, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_rank_matches_sympy_over_Q(r, c, data):
    m = [[data.draw(small) for _ in range(c)] for _ in range(r)]
    assert rank(m, QQ) == sympy.Matrix(m).rank()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(1, 3), st.data())
def test_rank_matches_minors_over_GFp(p, r, c, data):
    m = [[data.draw(st.integers(0, p - 1)) for _ in range(c)] for _ in range(r)]
    assert rank(m, GF(p)) == minor_rank(m, p)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_rref_is_reduced_and_same_rowspace(r, data):
    m = [[data.draw(small) for _ in range(3)] for _ in range(r)]
    rows, piv = rref(m, QQ)
    for i, c in enumerate(piv):
        assert rows[i][c] == 1
        assert all(rows[j][c] == 0 for j in range(len(rows)) if j != i)
    if rows:
        assert span(rows, QQ) == span(m, QQ, 3)
