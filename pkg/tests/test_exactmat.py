import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegelkit.errors import ShapeError, SingularMatrix
from siegelkit.exactmat import (
    MAX_DIM,
    IntegerMatrix,
    RationalMatrix,
    bareiss_det,
    denominator,
    det,
    format_rational,
    height,
    hnf,
    parse_rational,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=12)


@st.composite
def rational_matrices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return RationalMatrix([[draw(fractions) for _ in range(n)] for _ in range(n)])


@st.composite
def integer_matrices(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    return IntegerMatrix([[draw(st.integers(-9, 9)) for _ in range(n)] for _ in range(n)])


def leibniz_det(rows):
    # independent oracle: cofactor expansion along the first row
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    return sum((-1) ** c * Fraction(rows[0][c]) * leibniz_det([r[:c] + r[c + 1:] for r in rows[1:]])
               for c in range(n))


class TestHeightAndDenominator:
    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_identity(self, n):
        assert height(RationalMatrix.identity(n)) == 1
        assert denominator(RationalMatrix.identity(n)) == 1

    @pytest.mark.parametrize("text, h", [("1/2 3; 0 1", 3), ("5/7 2/3; 1 9", 9)])
    def test_height_examples(self, text, h):
        assert height(RationalMatrix.from_text(text)) == h

    @pytest.mark.parametrize("text, d", [("1/2 1/3; 1 1", 3), ("1/6 0; 0 1/4", 6), ("4 -7; 2 0", 1)])
    def test_denominator_examples(self, text, d):
        assert denominator(RationalMatrix.from_text(text)) == d

    @given(rational_matrices())
    def test_height_bounded_by_denominator_times_entries(self, m):
        biggest = max(abs(x) for row in m.rows for x in row)
        assert height(m) <= denominator(m) * max(1, math.ceil(biggest))

    @given(rational_matrices())
    def test_integral_iff_denominator_one(self, m):
        assert (denominator(m) == 1) == m.is_integral


class TestDet:
    @pytest.mark.parametrize("text, value", [("1 0; 0 1", 1), ("2 0; 0 3", 6), ("1/2 1; 1 2", 0)])
    def test_examples(self, text, value):
        assert det(RationalMatrix.from_text(text)) == value

    @given(rational_matrices())
    def test_matches_cofactor_oracle(self, m):
        assert det(m) == leibniz_det([list(r) for r in m.rows])

    def test_multiplicative_500_pairs(self):
        rng = random.Random(7)
        for _ in range(500):
            n = rng.randint(1, 5)
            a, b = (RationalMatrix([[Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(n)]
                                    for _ in range(n)]) for _ in range(2))
            assert det(a @ b) == det(a) * det(b)

    def test_bareiss_integers(self):
        assert bareiss_det([[2, 1], [7, 4]]) == 1
        assert bareiss_det([[0, 1], [1, 0]]) == -1


class TestHnf:
    def test_identity(self):
        h, u = hnf(IntegerMatrix.identity(3))
        assert h == IntegerMatrix.identity(3) and u == IntegerMatrix.identity(3)

    @pytest.mark.parametrize("m, h, u", [
        ([[0, 1], [2, 0]], [[2, 0], [0, 1]], [[0, 1], [1, 0]]),
        ([[2, 4], [0, 2]], [[2, 0], [0, 2]], [[1, -2], [0, 1]]),
    ])
    def test_examples(self, m, h, u):
        got_h, got_u = hnf(IntegerMatrix(m))
        assert got_h == IntegerMatrix(h) and got_u == IntegerMatrix(u)
        assert got_u @ IntegerMatrix(m) == got_h

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            hnf(IntegerMatrix([[1, 2], [2, 4]]))

    def test_500_random(self):
        rng = random.Random(11)
        done = 0
        while done < 500:
            n = rng.randint(1, 5)
            m = IntegerMatrix([[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)])
            if det(m) == 0:
                continue
            h, u = hnf(m)
            assert u @ m == h
            assert abs(det(u)) == 1
            assert abs(det(h)) == abs(det(m))
            for i in range(n):
                assert h[i, i] > 0
                for j in range(n):
                    if i > j:
                        assert h[i, j] == 0
                    elif i < j:
                        assert 0 <= h[i, j] < h[j, j]
            done += 1


class TestParsing:
    @given(fractions)
    def test_rational_round_trip(self, x):
        assert parse_rational(format_rational(x)) == x

    @pytest.mark.parametrize("bad", ["1.5", "1/0x", "", "2//3", "a"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            parse_rational(bad)

    @given(rational_matrices())
    def test_text_and_json_round_trip(self, m):
        assert RationalMatrix.from_text(m.to_text()) == m
        assert RationalMatrix.from_json(m.to_json()) == m

    def test_entries_in_lowest_terms(self):
        m = RationalMatrix.from_text("2/4 -6/9; 0 1")
        assert m[0, 0] == Fraction(1, 2) and m[0, 1].denominator == 3

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            RationalMatrix([[1, 2]])
        with pytest.raises(ShapeError):
            RationalMatrix.identity(MAX_DIM + 1)

    def test_unimodular_flag(self):
        assert IntegerMatrix([[2, 1], [1, 1]]).is_unimodular
        assert not IntegerMatrix([[2, 0], [0, 1]]).is_unimodular
        assert isinstance(IntegerMatrix([[1, 1], [0, 1]]) @ IntegerMatrix([[1, 0], [1, 1]]), IntegerMatrix)
