"""The upper half-plane picture for GL_2: Mobius action, SL_2(Z) reduction and
the height of isogeny matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .decomp import DEFAULT_PRECISION, precision_context, to_mpfr
from .errors import DomainError, PrecisionExhausted
from .exactmat import IntegerMatrix, format_rational

T_GEN = IntegerMatrix([[1, 1], [0, 1]])
S_GEN = IntegerMatrix([[0, -1], [1, 0]])


@dataclass(frozen=True)
class UpperHalfPoint:
    re: mpfr
    im: mpfr

    def __post_init__(self):
        if not self.im > 0:
            raise DomainError(f"imaginary part must be positive, got {self.im}")

    @classmethod
    def make(cls, re, im, precision: int = DEFAULT_PRECISION) -> UpperHalfPoint:
        return cls(to_mpfr(_num(re), precision), to_mpfr(_num(im), precision))

    @classmethod
    def parse(cls, text: str, precision: int = DEFAULT_PRECISION) -> UpperHalfPoint:
        """``"re,im"`` with each part an integer, ``a/b`` or a decimal."""
        re, im = (s.strip() for s in text.split(","))
        return cls.make(re, im, precision)

    def abs2(self) -> mpfr:
        with precision_context(max(self.re.precision, self.im.precision)):
            return self.re * self.re + self.im * self.im


def _num(x):
    if isinstance(x, str) and "/" in x:
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return x


@dataclass(frozen=True)
class FundamentalDomainCert:
    point: UpperHalfPoint
    delta: IntegerMatrix


def in_fundamental_domain(z: UpperHalfPoint, tol) -> bool:
    with precision_context(max(z.re.precision, z.im.precision)):
        tol = mpfr(tol)
        half = mpfr(0.5)
        return -half - tol <= z.re <= half + tol and z.abs2() >= 1 - tol


def _entries(g):
    if hasattr(g, "rows"):
        (a, b), (c, d) = g.rows
    else:
        (a, b), (c, d) = np.asarray(g, dtype=object).tolist()
    return a, b, c, d


def mobius(g, z: UpperHalfPoint, precision: int = DEFAULT_PRECISION) -> UpperHalfPoint:
    """``(a z + b) / (c z + d)`` for ``det g > 0``."""
    a, b, c, d = (_lift(v, precision) for v in _entries(g))
    with precision_context(precision):
        det = a * d - b * c
        if not det > 0:
            raise DomainError(f"Mobius action needs det g > 0, got {det}")
        x, y = z.re, z.im
        cx_d = c * x + d
        cy = c * y
        denom = cx_d * cx_d + cy * cy
        re = ((a * x + b) * cx_d + a * c * y * y) / denom
        im = det * y / denom
        return UpperHalfPoint(re, im)


def _lift(v, precision):
    if isinstance(v, int):
        return v
    return to_mpfr(v, precision)


def _gauss_reduce(x, y, eta, max_iter):
    # delta = [[p, q], [r, s]], tracked with exact integers
    p, q, r, s = 1, 0, 0, 1
    half = mpfr(0.5) + eta
    for _ in range(max_iter):
        k = int(gmpy2.rint(x))
        if k and abs(x) > half:
            x -= k
            p, q = p - k * r, q - k * s
        n2 = x * x + y * y
        if n2 < 1 - eta:
            x, y = -x / n2, y / n2
            p, q, r, s = -r, -s, p, q
            continue
        if abs(x) <= half:
            return x, y, (p, q, r, s)
    raise PrecisionExhausted(f"reduce_point did not converge in {max_iter} steps")


def reduce_point(z: UpperHalfPoint, precision: int = DEFAULT_PRECISION, tol=None,
                 max_iter: int = 10_000) -> FundamentalDomainCert:
    """Gauss reduction: translate into |Re z| <= 1/2, invert while |z| < 1.

    Returns the reduced point and the accumulated ``delta`` in SL_2(Z).
    """
    with precision_context(precision):
        tol = mpfr(2) ** -(precision // 2) if tol is None else mpfr(tol)
        x, y, (p, q, r, s) = _gauss_reduce(+z.re, +z.im, tol / 4, max_iter)
        point = UpperHalfPoint(x, y)
        if not in_fundamental_domain(point, tol):
            raise PrecisionExhausted("reduced point could not be certified in the fundamental domain")
        return FundamentalDomainCert(point, IntegerMatrix([[p, q], [r, s]]))


def isogeny_matrices(N: int) -> list[IntegerMatrix]:
    """Hermite normal forms [[a, b], [0, d]] with a d = N and 0 <= b < d, ordered by a."""
    if N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    out = []
    for a in range(1, N + 1):
        if N % a == 0:
            d = N // a
            out.extend(IntegerMatrix([[a, b], [0, d]]) for b in range(d))
    return out


def divisor_sum(N: int) -> int:
    return sum(k for k in range(1, N + 1) if N % k == 0)


@dataclass(frozen=True)
class GL2Record:
    N: int
    idx: int
    a: int
    b: int
    d: int
    H: int
    ratio: Fraction

    CSV_COLUMNS = ("N", "idx", "a", "b", "d", "H", "ratio")

    def csv_row(self) -> list[str]:
        return [str(self.N), str(self.idx), str(self.a), str(self.b), str(self.d), str(self.H),
                f"{float(self.ratio):.17g}"]

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in self.CSV_COLUMNS[:-1]}
        out["ratio"] = format_rational(self.ratio)
        return out

    @classmethod
    def from_json(cls, data: dict) -> GL2Record:
        return cls(*(int(data[k]) for k in cls.CSV_COLUMNS[:-1]), Fraction(data["ratio"]))


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def hp_experiment(x: UpperHalfPoint, N_max: int, precision: int = DEFAULT_PRECISION,
                  check_tol=1e-10):
    """Heights of ``gamma = delta m`` over all HNF matrices ``m`` with det N <= N_max.

    For each ``m``, ``y = m x`` is reduced to the fundamental domain by
    ``delta`` and ``gamma = delta m`` (so ``gamma x`` lies in the domain).
    Returns ``(records, summary)``; the summary holds the slope of
    log max_N H against log N and the largest H/N.
    """
    if not in_fundamental_domain(x, mpfr(2) ** -(precision // 2)):
        raise DomainError("base point x must lie in the fundamental domain")
    records = []
    max_h = {}
    all_in_domain = True
    with precision_context(precision):
        tol = mpfr(2) ** -(precision // 2)
        check_tol = mpfr(check_tol)
        x0, y0 = +x.re, +x.im
        for N in range(1, N_max + 1):
            best = 0
            idx = 0
            for a in (a for a in range(1, N + 1) if N % a == 0):
                d = N // a
                for b in range(d):
                    # m x = (a x + b) / d, then reduce; gamma = delta m stays integral
                    xr, yr, (p, q, r, s) = _gauss_reduce((a * x0 + b) / d, a * y0 / d, tol / 4, 10_000)
                    if not in_fundamental_domain(UpperHalfPoint(xr, yr), tol):
                        raise PrecisionExhausted(f"could not certify reduction for N={N}, m=[[{a},{b}],[0,{d}]]")
                    g = (p * a, p * b + q * d, r * a, r * b + s * d)
                    if not in_fundamental_domain(mobius(((g[0], g[1]), (g[2], g[3])), x, precision), check_tol):
                        all_in_domain = False
                    h = max(abs(v) for v in g)
                    best = max(best, h)
                    records.append(GL2Record(N, idx, a, b, d, h, Fraction(h, N)))
                    idx += 1
            max_h[N] = best
    ns = sorted(max_h)
    summary = {
        "slope": loglog_slope(ns, [max_h[n] for n in ns]) if len(ns) > 1 else math.nan,
        "max_ratio": max(r.ratio for r in records),
        "all_in_domain": all_in_domain,
        "max_height_by_N": max_h,
    }
    return records, summary
