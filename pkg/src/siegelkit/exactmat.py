"""Exact square matrices over Q and Z.

Entries are stored as :class:`fractions.Fraction` (always in lowest terms) or
plain Python ints. Matrices are immutable; every function here is pure.

Text format: rows separated by ``;``, entries by whitespace, each entry an
integer or ``a/b``. Example: ``"1/2 3; 0 1"``.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from functools import reduce

from .errors import ShapeError, SingularMatrix

MAX_DIM = 16

_ENTRY_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(token) -> Fraction:
    if isinstance(token, (int, Fraction)):
        return Fraction(token)
    token = str(token).strip()
    if not _ENTRY_RE.match(token):
        raise ValueError(f"malformed rational entry {token!r}; expected 'a' or 'a/b'")
    value = Fraction(token)
    return value


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class RationalMatrix:
    """An immutable n x n matrix with rational entries."""

    __slots__ = ("_rows", "_hash")

    def __init__(self, rows):
        rows = tuple(tuple(self._coerce(x) for x in row) for row in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ShapeError(f"matrix must be square and non-empty, got row lengths {[len(r) for r in rows]}")
        if n > MAX_DIM:
            raise ShapeError(f"dimension {n} exceeds the cap MAX_DIM={MAX_DIM}")
        self._rows = rows
        self._hash = None

    @staticmethod
    def _coerce(x):
        return parse_rational(x)

    @classmethod
    def identity(cls, n: int):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values):
        values = list(values)
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_text(cls, text: str):
        """Parse ``"1/2 3; 0 1"`` style text (also tolerates newlines between rows)."""
        chunks = [c for c in re.split(r"[;\n]", text) if c.strip()]
        return cls([c.split() for c in chunks])

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls([[parse_rational(x) for x in row] for row in data])

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self):
        return self._rows

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text()!r})"

    def to_text(self) -> str:
        return "; ".join(" ".join(format_rational(x) for x in row) for row in self._rows)

    def to_json(self):
        return [[format_rational(x) for x in row] for row in self._rows]

    @property
    def T(self):
        return type(self)(list(zip(*self._rows)))

    @property
    def is_integral(self) -> bool:
        return all(Fraction(x).denominator == 1 for row in self._rows for x in row)

    def __matmul__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if other.n != self.n:
            raise ShapeError(f"dimension mismatch {self.n} vs {other.n}")
        cols = list(zip(*other._rows))
        prod = [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self._rows]
        if isinstance(self, IntegerMatrix) and isinstance(other, IntegerMatrix):
            return IntegerMatrix(prod)
        return RationalMatrix(prod)

    def scale(self, c):
        c = Fraction(c)
        return RationalMatrix([[c * x for x in row] for row in self._rows])

    def inverse(self) -> RationalMatrix:
        """Exact inverse by Gauss-Jordan elimination."""
        n = self.n
        aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
               for i, row in enumerate(self._rows)]
        for k in range(n):
            piv = next((r for r in range(k, n) if aug[r][k] != 0), None)
            if piv is None:
                raise SingularMatrix("matrix is singular; no inverse")
            aug[k], aug[piv] = aug[piv], aug[k]
            p = aug[k][k]
            aug[k] = [x / p for x in aug[k]]
            for r in range(n):
                if r != k and aug[r][k] != 0:
                    f = aug[r][k]
                    aug[r] = [a - f * b for a, b in zip(aug[r], aug[k])]
        return RationalMatrix([row[n:] for row in aug])


class IntegerMatrix(RationalMatrix):
    """A square matrix with integer entries."""

    __slots__ = ("_unimodular",)

    def __init__(self, rows):
        super().__init__(rows)
        self._unimodular = None

    @staticmethod
    def _coerce(x):
        x = parse_rational(x)
        if x.denominator != 1:
            raise ValueError(f"non-integer entry {x} in IntegerMatrix")
        return int(x)

    @classmethod
    def from_rational(cls, m: RationalMatrix):
        return cls(m.rows)

    @property
    def is_unimodular(self) -> bool:
        if self._unimodular is None:
            self._unimodular = abs(bareiss_det(self.rows)) == 1
        return self._unimodular


def bareiss_det(rows) -> int:
    """Fraction-free determinant of an integer matrix given as nested sequences."""
    a = [list(map(int, r)) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                # exact division is guaranteed by Sylvester's identity
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def height(m: RationalMatrix) -> int:
    return max(max(abs(x.numerator), x.denominator) for row in m.rows for x in map(Fraction, row))


def denominator(m: RationalMatrix) -> int:
    return max(Fraction(x).denominator for row in m.rows for x in row)


def det(m: RationalMatrix) -> Fraction:
    """Exact determinant: clear denominators row by row, then Bareiss."""
    scaled = []
    scale = 1
    for row in m.rows:
        lcm = reduce(math.lcm, (Fraction(x).denominator for x in row), 1)
        scale *= lcm
        scaled.append([int(Fraction(x) * lcm) for x in row])
    return Fraction(bareiss_det(scaled), scale)


def hnf(m: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix]:
    """Row-style Hermite normal form ``H = U @ M``.

    ``H`` is upper triangular with positive diagonal and ``0 <= H[i][j] < H[j][j]``
    for ``i < j``; ``U`` is unimodular.
    """
    if not isinstance(m, IntegerMatrix):
        m = IntegerMatrix.from_rational(m)
    n = m.n
    h = [list(r) for r in m.rows]
    u = [[int(i == j) for j in range(n)] for i in range(n)]

    def axpy(dst, src, q):
        # row_dst -= q * row_src, on both h and u
        h[dst] = [a - q * b for a, b in zip(h[dst], h[src])]
        u[dst] = [a - q * b for a, b in zip(u[dst], u[src])]

    for k in range(n):
        while True:
            nz = [r for r in range(k, n) if h[r][k] != 0]
            if not nz:
                raise SingularMatrix("hnf requires det M != 0")
            piv = min(nz, key=lambda r: abs(h[r][k]))
            if piv != k:
                h[k], h[piv] = h[piv], h[k]
                u[k], u[piv] = u[piv], u[k]
            done = True
            for r in range(k + 1, n):
                if h[r][k] != 0:
                    axpy(r, k, h[r][k] // h[k][k])
                    if h[r][k] != 0:
                        done = False
            if done:
                break
        if h[k][k] < 0:
            h[k] = [-x for x in h[k]]
            u[k] = [-x for x in u[k]]
        for r in range(k):
            q = h[r][k] // h[k][k]
            if q:
                axpy(r, k, q)
    return IntegerMatrix(h), IntegerMatrix(u)
