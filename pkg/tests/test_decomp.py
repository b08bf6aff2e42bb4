import gmpy2
import numpy as np
import pytest
from gmpy2 import mpfr
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_invertible
from siegelkit.decomp import (
    diag,
    eps_rec,
    format_bigfloat,
    identity,
    iwasawa,
    max_abs,
    orthonormalize_rows,
    precision_context,
    rational_lift,
    real_matrix,
    to_sci,
    udu_factor,
)
from siegelkit.errors import NearSingular, NotPositiveDefinite, ShapeError
from siegelkit.exactmat import RationalMatrix

P = 128


def assert_close(a, b, tol):
    with precision_context(4 * P):
        assert max_abs(np.asarray(a, dtype=object) - np.asarray(b, dtype=object)) <= tol


class TestUdu:
    def test_identity(self):
        nu, d = udu_factor(identity(3, P), P)
        assert_close(nu, identity(3, P), 0)
        assert list(d) == [1, 1, 1]

    def test_two_by_two_example(self):
        nu, d = udu_factor(real_matrix([[5, 1], [1, 1]], P), P)
        assert_close(nu, real_matrix([[1, 1], [0, 1]], P), 0)
        assert list(d) == [4, 1]

    def test_diagonal(self):
        nu, d = udu_factor(real_matrix([[9, 0], [0, 4]], P), P)
        assert_close(nu, identity(2, P), 0)
        assert list(d) == [9, 4]

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            udu_factor(real_matrix([[1, 2], [2, 1]], P), P)

    def test_not_symmetric(self):
        with pytest.raises(ShapeError):
            udu_factor(real_matrix([[2, 1], [0, 2]], P), P)

    def test_reconstructs_random_spd(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 7))
            g = random_invertible(rng, n)
            with precision_context(2 * P):
                a = g @ g.T
            nu, d = udu_factor(a, 2 * P)
            with precision_context(2 * P):
                back = nu @ diag(list(d)) @ nu.T
                assert max_abs(back - a) <= eps_rec(P) * max_abs(a)


class TestIwasawa:
    def test_identity(self):
        dec = iwasawa(identity(4, P), P)
        assert_close(dec.nu, identity(4, P), 0)
        assert list(dec.alpha) == [1] * 4
        assert_close(dec.kappa, identity(4, P), 0)

    def test_example(self):
        dec = iwasawa(real_matrix([[2, 1], [0, 1]], P), P)
        assert_close(dec.nu, real_matrix([[1, 1], [0, 1]], P), 0)
        assert list(dec.alpha) == [2, 1]
        assert_close(dec.kappa, identity(2, P), 0)

    def test_orthogonal_input(self, rng):
        k0 = orthonormalize_rows(real_matrix(rng.standard_normal((4, 4)).tolist(), P), P)
        dec = iwasawa(k0, P)
        assert_close(dec.nu, identity(4, P), eps_rec(P))
        assert_close(list(dec.alpha), [1] * 4, eps_rec(P))
        assert_close(dec.kappa, k0, eps_rec(P))

    def test_near_singular(self):
        with pytest.raises(NearSingular):
            iwasawa(real_matrix([[1, 1], [1, 1]], P), P)

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_invariants(self, n, seed):
        g = random_invertible(np.random.default_rng(seed), n)
        dec = iwasawa(g, P)
        tol = eps_rec(P)
        for i in range(n):
            assert dec.nu[i, i] == 1
            assert all(dec.nu[i, j] == 0 for j in range(i))
            assert dec.alpha[i] > 0
        assert dec.residual(g) <= tol
        assert dec.orthogonality_defect() <= tol

    def test_deterministic_and_unique(self, rng):
        g = random_invertible(rng, 5)
        a, b = iwasawa(g, P), iwasawa(g.copy(), P)
        tol = mpfr(2) ** -(P - 40)
        assert_close(a.nu, b.nu, tol)
        assert_close(a.kappa, b.kappa, tol)

    def test_uniqueness_against_gram_schmidt(self, rng):
        # independent oracle: Gram-Schmidt on the rows from the bottom up
        g = random_invertible(rng, 4)
        dec = iwasawa(g, P)
        with precision_context(2 * P):
            rows = [g[i].copy() for i in range(4)]
            q = [None] * 4
            for i in range(3, -1, -1):
                v = rows[i]
                for j in range(i + 1, 4):
                    v = v - (v @ q[j]) * q[j]
                q[i] = v / gmpy2.sqrt(v @ v)
            assert_close(dec.kappa, np.array(q, dtype=object), mpfr(2) ** -(P - 40))

    def test_det_identity(self, rng):
        g = random_invertible(rng, 3)
        dec = iwasawa(g, P)
        det_g = abs(np.linalg.det(np.array(g, dtype=float)))
        prod = float(dec.alpha[0] * dec.alpha[1] * dec.alpha[2])
        assert prod == pytest.approx(det_g, rel=1e-12)

    def test_precision_is_respected(self, rng):
        g = random_invertible(rng, 3, precision=256)
        dec = iwasawa(g, 256)
        assert dec.kappa[0, 0].precision == 256
        assert dec.residual(g) <= eps_rec(256)


class TestLiftAndFormat:
    def test_rational_lift(self):
        assert rational_lift(RationalMatrix.identity(2), P)[1, 1] == 1
        assert rational_lift(RationalMatrix([["1/2"]]), P)[0, 0] == mpfr("0.5")
        third = rational_lift(RationalMatrix([["1/3"]]), P)[0, 0]
        assert third.precision == P
        assert abs(gmpy2.mpq(third) - gmpy2.mpq(1, 3)) <= gmpy2.mpq(1, 2 ** (P + 1))

    def test_sci_notation(self):
        assert to_sci(mpfr(1), 4) == "1.000e+00"
        assert to_sci(mpfr(-0.00125), 3) == "-1.25e-03"
        assert format_bigfloat(mpfr(0), 12) == "0.000e+00"

    def test_format_keeps_full_precision(self):
        with precision_context(P):
            x = mpfr(2) / 3
        assert format_bigfloat(x, P).startswith("6.6666666666666666666666666666666666666")
