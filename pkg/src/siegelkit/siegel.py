"""Standard Siegel sets Omega_u A_t K in GL_n(R) and reduction into them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .decomp import (
    DEFAULT_PRECISION,
    IwasawaDecomposition,
    _udu,
    eps_pivot,
    internal_precision,
    iwasawa,
    precision_context,
    real_matrix,
    to_mpfr,
)
from .errors import DomainError, NearSingular, NotPositiveDefinite, PrecisionExhausted, ShapeError
from .exactmat import IntegerMatrix

SQRT3_OVER_2 = "sqrt3over2"


@dataclass(frozen=True)
class SiegelParams:
    """Parameters ``(u, t)`` of ``Omega_u A_t K``.

    ``t`` is stored through its square so that ``t = sqrt(3)/2`` stays exact.
    """

    u: Fraction
    t_squared: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "t_squared", Fraction(self.t_squared))
        if self.u <= 0 or self.t_squared <= 0:
            raise DomainError(f"Siegel parameters need u > 0 and t > 0, got u={self.u}, t^2={self.t_squared}")

    @classmethod
    def from_values(cls, u, t) -> SiegelParams:
        """``t`` may be a rational (number or ``"a/b"``) or the token ``"sqrt3over2"``."""
        if isinstance(u, str):
            u = Fraction(u)
        if isinstance(t, str) and t.strip() == SQRT3_OVER_2:
            return cls(u, Fraction(3, 4))
        t = Fraction(t)
        return cls(u, t * t)

    @classmethod
    def fundamental(cls) -> SiegelParams:
        return cls(Fraction(1, 2), Fraction(3, 4))

    @property
    def is_fundamental(self) -> bool:
        return self.u >= Fraction(1, 2) and self.t_squared <= Fraction(3, 4)

    def t(self, precision: int = DEFAULT_PRECISION) -> mpfr:
        with precision_context(precision):
            return gmpy2.sqrt(to_mpfr(self.t_squared, precision))

    def t_text(self) -> str:
        if self.t_squared == Fraction(3, 4):
            return SQRT3_OVER_2
        root = Fraction(gmpy2.isqrt(self.t_squared.numerator), gmpy2.isqrt(self.t_squared.denominator))
        if root * root == self.t_squared:
            return str(root)
        return f"sqrt({self.t_squared})"


def _as_mpfr(x) -> mpfr:
    if isinstance(x, mpfr):
        return x
    return to_mpfr(Fraction(x) if isinstance(x, int) else x, gmpy2.get_context().precision)


def _input_precision(values) -> int:
    # compare at the inputs' own precision, never the (possibly 53-bit) ambient one
    bits = [x.precision for x in values if isinstance(x, mpfr)]
    return max(bits + [gmpy2.get_context().precision])


def in_omega(nu, u, tol) -> bool:
    """True iff every strict-upper entry of the unit upper triangular ``nu`` has |.| <= u + tol."""
    with precision_context(_input_precision(np.asarray(nu, dtype=object).flat)):
        return _in_omega(nu, u, tol)


def _in_omega(nu, u, tol) -> bool:
    n = nu.shape[0]
    u, tol = _as_mpfr(u), _as_mpfr(tol)
    for i in range(n):
        if abs(nu[i, i] - 1) > tol:
            raise ShapeError(f"nu[{i + 1},{i + 1}] = {nu[i, i]} is not 1")
        for j in range(i):
            if abs(nu[i, j]) > tol:
                raise ShapeError(f"nu[{i + 1},{j + 1}] = {nu[i, j]} below the diagonal")
    return all(abs(nu[i, j]) <= u + tol for i in range(n) for j in range(i + 1, n))


def in_at(alpha, t, tol) -> bool:
    """True iff ``alpha_j / alpha_{j+1} >= t (1 - tol)`` for all j."""
    if any(not a > 0 for a in alpha):
        raise DomainError("A_t membership needs a positive diagonal")
    with precision_context(_input_precision(alpha)):
        bound = _as_mpfr(t) * (1 - _as_mpfr(tol))
        return all(alpha[j] / alpha[j + 1] >= bound for j in range(len(alpha) - 1))


def in_siegel(g, params: SiegelParams, tol, precision: int = DEFAULT_PRECISION):
    """Membership of ``g`` in ``Omega_u A_t K``; returns ``(flag, iwasawa(g))``."""
    dec = iwasawa(g, precision)
    return membership(dec, params, tol), dec


def membership(dec: IwasawaDecomposition, params: SiegelParams, tol) -> bool:
    with precision_context(dec.precision):
        return in_omega(dec.nu, params.u, tol) and in_at(dec.alpha, params.t(dec.precision), tol)


def log_potential(d) -> mpfr:
    """log of prod_j alpha_j^(2j) (1-based j) from the squared diagonal ``d``.

    Every swap of the reduction loop lowers this quantity.
    """
    return sum((j + 1) * gmpy2.log(dj) for j, dj in enumerate(d))


def _int_times_real(delta, g):
    n = len(delta)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        acc = [mpfr(0)] * n
        for k, c in enumerate(delta[i]):
            if c:
                row = g[k]
                acc = [a + c * b for a, b in zip(acc, row)]
        out[i] = acc
    return out


def reduce_to_siegel(g, params: SiegelParams | None = None, tol=1e-12,
                     precision: int = DEFAULT_PRECISION, max_iter: int = 100_000,
                     trace: list | None = None):
    """Find a unimodular ``delta`` with ``delta @ g`` in the Siegel set.

    Alternates size reduction (|nu_ij| <= 1/2 via integer row operations with
    later rows) with adjacent row swaps whenever ``alpha_j/alpha_{j+1} < t``.
    If ``trace`` is a list, the log-potential is appended once per iteration.

    Returns ``(delta, iwasawa(delta @ g))``.
    """
    params = params or SiegelParams.fundamental()
    if not params.is_fundamental:
        raise DomainError("reduce_to_siegel needs u >= 1/2 and t <= sqrt(3)/2")
    g = real_matrix(g, precision)
    n = g.shape[0]
    delta = [[int(i == j) for j in range(n)] for i in range(n)]
    work = internal_precision(precision)
    tol = mpfr(tol)
    with precision_context(work):
        # swap strictly inside the accepted region so certification cannot fail on ties
        eta = min(tol / 4, mpfr(2) ** -(precision // 2))
        swap_bound = to_mpfr(params.t_squared, work) * (1 - eta) ** 2
        for _ in range(max_iter):
            y = _int_times_real(delta, g)
            try:
                nu, d = _udu(y @ y.T, eps_pivot(precision) ** 2)
            except NotPositiveDefinite as exc:
                raise NearSingular(f"g is numerically singular at {precision} bits: {exc}") from None
            for i in range(n - 1):
                for j in range(i + 1, n):
                    m = int(gmpy2.rint(nu[i, j]))
                    if m:
                        delta[i] = [a - m * b for a, b in zip(delta[i], delta[j])]
                        nu[i, j:] = nu[i, j:] - m * nu[j, j:]
            if trace is not None:
                trace.append(log_potential(d))
            swap = next((j for j in range(n - 2, -1, -1) if d[j] < swap_bound * d[j + 1]), None)
            if swap is None:
                break
            delta[swap], delta[swap + 1] = delta[swap + 1], delta[swap]
        else:
            raise PrecisionExhausted(f"reduction did not terminate within {max_iter} iterations")
    delta_m = IntegerMatrix(delta)
    with precision_context(work):
        reduced = _int_times_real(delta, g)
    ok, dec = in_siegel(reduced, params, tol, precision)
    if not ok:
        raise PrecisionExhausted(
            f"delta.g could not be certified in the Siegel set at {precision} bits (tol={float(tol):.3g})")
    return delta_m, dec
