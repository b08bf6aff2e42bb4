"""Multiprecision real linear algebra: UDU^T factorization and Iwasawa (NAK).

Real matrices are numpy object arrays of :class:`gmpy2.mpfr`. Precision is
always passed in explicitly and applied through a gmpy2 context that is local
to the call (gmpy2 contexts are thread-local), so concurrent calls at
different precisions do not interfere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .errors import NearSingular, NotPositiveDefinite, ShapeError
from .exactmat import RationalMatrix

DEFAULT_PRECISION = 128
GUARD_BITS = 30


def precision_context(precision: int):
    return gmpy2.context(precision=precision)


def eps_rec(precision: int):
    """Reconstruction/orthogonality tolerance 2^-(p-30)."""
    return mpfr(2) ** -(precision - GUARD_BITS)


def eps_pivot(precision: int):
    return mpfr(2) ** -(precision // 2)


def internal_precision(precision: int) -> int:
    # g g^T squares the condition number; doubling the bits keeps kappa
    # orthogonal to working precision for any input that passes the pivot test
    return 2 * precision


def to_mpfr(x, precision: int):
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator), precision)
    if isinstance(x, str):
        if "/" in x:
            return to_mpfr(Fraction(x), precision)
        return mpfr(x, precision)
    return mpfr(x, precision)


def real_matrix(rows, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Build an object array of mpfr from nested numbers/strings/Fractions."""
    if isinstance(rows, RationalMatrix):
        rows = rows.rows
    arr = np.array(rows, dtype=object)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = to_mpfr(x, precision)
    return out


def real_vector(values, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for i, x in enumerate(values):
        out[i] = to_mpfr(x, precision)
    return out


def rational_lift(m: RationalMatrix, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Entrywise correctly rounded conversion of an exact matrix."""
    return real_matrix(m, precision)


def identity(n: int, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    return real_matrix([[int(i == j) for j in range(n)] for i in range(n)], precision)


def diag(values) -> np.ndarray:
    n = len(values)
    out = np.empty((n, n), dtype=object)
    zero = mpfr(0)
    for i in range(n):
        for j in range(n):
            out[i, j] = values[i] if i == j else zero
    return out


def round_to(a: np.ndarray, precision: int) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = mpfr(x, precision)
    return out


def max_abs(a) -> mpfr:
    """Largest absolute entry (the entrywise infinity norm used for residuals)."""
    return max((abs(x) for x in np.asarray(a, dtype=object).flat), default=mpfr(0))


def matmul(a, b, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    with precision_context(precision):
        return a @ b


def to_sci(x, digits: int) -> str:
    """Decimal scientific notation with ``digits`` significant digits."""
    if not isinstance(x, mpfr):
        # mpfr(mpfr) would re-round to the ambient context precision
        x = mpfr(x, 2 * DEFAULT_PRECISION)
    if gmpy2.is_nan(x) or gmpy2.is_infinite(x):
        return str(x)
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = x.digits(10, digits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+03d}"


def format_bigfloat(x, precision: int = DEFAULT_PRECISION) -> str:
    return to_sci(x, max(precision // 3, 1))


def _udu(a: np.ndarray, rel_pivot) -> tuple[np.ndarray, list]:
    n = a.shape[0]
    w = a.copy()
    nu = np.empty((n, n), dtype=object)
    nu.fill(mpfr(0))
    scale = max(abs(w[i, i]) for i in range(n))
    d = [None] * n
    for k in range(n - 1, -1, -1):
        pk = w[k, k]
        if not pk > rel_pivot * scale:
            raise NotPositiveDefinite(f"pivot {k + 1} is {pk}, not above the pivot tolerance")
        d[k] = pk
        nu[k, k] = mpfr(1)
        if k:
            col = w[:k, k]
            nu[:k, k] = col / pk
            w[:k, :k] = w[:k, :k] - np.outer(col, w[k, :k]) / pk
    return nu, d


def udu_factor(a, precision: int = DEFAULT_PRECISION):
    """Factor a symmetric positive definite matrix as ``nu @ diag(d) @ nu.T``.

    ``nu`` is unit upper triangular. The elimination runs from the last row
    upwards. Pivots are compared against ``2^-(p/2)`` times the largest
    diagonal entry.
    """
    with precision_context(precision):
        a = real_matrix(a, precision) if not _is_real(a) else a
        asym = max_abs(a - a.T)
        if asym > eps_rec(precision) * max(mpfr(1), max_abs(a)):
            raise ShapeError(f"matrix is not symmetric (asymmetry {float(asym):.3g})")
        nu, d = _udu(a, eps_pivot(precision))
        return nu, np.array(d, dtype=object)


def _is_real(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object and all(
        isinstance(x, mpfr) for x in a.flat)


def unit_upper_solve(nu: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``nu^-1 @ b`` for unit upper triangular ``nu`` (back substitution)."""
    n = nu.shape[0]
    w = b.copy()
    for i in range(n - 2, -1, -1):
        w[i] = w[i] - nu[i, i + 1:] @ w[i + 1:]
    return w


@dataclass(frozen=True, eq=False)
class IwasawaDecomposition:
    """``g = nu @ diag(alpha) @ kappa``."""

    nu: np.ndarray
    alpha: np.ndarray
    kappa: np.ndarray
    precision: int = DEFAULT_PRECISION

    @property
    def n(self) -> int:
        return len(self.alpha)

    def reconstruct(self) -> np.ndarray:
        with precision_context(self.precision):
            return self.nu @ diag(list(self.alpha)) @ self.kappa

    def residual(self, g) -> mpfr:
        with precision_context(self.precision):
            return max_abs(self.reconstruct() - g)

    def orthogonality_defect(self) -> mpfr:
        with precision_context(self.precision):
            return max_abs(self.kappa @ self.kappa.T - identity(self.n, self.precision))


def iwasawa(g, precision: int = DEFAULT_PRECISION) -> IwasawaDecomposition:
    """Iwasawa decomposition ``g = nu alpha kappa`` via UDU^T of ``g g^T``.

    ``alpha_i = sqrt(d_i)`` and ``kappa = alpha^-1 nu^-1 g``. The arithmetic
    runs at doubled precision and the factors are rounded back to
    ``precision`` bits.
    """
    if not _is_real(g):
        g = real_matrix(g, precision)
    n = g.shape[0]
    work = internal_precision(precision)
    with precision_context(work):
        a = g @ g.T
        try:
            # d_i = alpha_i^2, so the squared pivot bound tests alpha against 2^-(p/2)
            nu, d = _udu(a, eps_pivot(precision) ** 2)
        except NotPositiveDefinite as exc:
            raise NearSingular(f"g is numerically singular at {precision} bits: {exc}") from None
        alpha = [gmpy2.sqrt(x) for x in d]
        w = unit_upper_solve(nu, g)
        kappa = np.empty((n, n), dtype=object)
        for i in range(n):
            kappa[i] = w[i] / alpha[i]
        eye = identity(n, work)
        if max_abs(kappa @ kappa.T - eye) > eps_rec(precision) / 4:
            kappa = kappa @ (3 * eye - kappa.T @ kappa) / 2
    with precision_context(precision):
        return IwasawaDecomposition(
            nu=round_to(nu, precision),
            alpha=round_to(np.array(alpha, dtype=object), precision),
            kappa=round_to(kappa, precision),
            precision=precision,
        )


def orthonormalize_rows(m: np.ndarray, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Modified Gram-Schmidt on the rows, top to bottom (one reorthogonalization pass)."""
    with precision_context(precision):
        q = m.copy()
        n = q.shape[0]
        for i in range(n):
            for _ in range(2):
                for j in range(i):
                    q[i] = q[i] - (q[i] @ q[j]) * q[j]
            q[i] = q[i] / gmpy2.sqrt(q[i] @ q[i])
        return q
