"""Conjugating a non-standard Siegel set of GL_n into a standard one.

A Siegel set is given by a rational full flag (columns of ``g_P``; the
parabolic is ``g_P P0 g_P^-1`` with P0 the upper triangular Borel), a
positive definite form ``Q`` (the compact subgroup is ``O(Q)``), the cone
parameter ``t`` and finitely many samples of the compact set Omega.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .decomp import (
    DEFAULT_PRECISION,
    _udu,
    diag,
    eps_pivot,
    format_bigfloat,
    identity,
    iwasawa,
    orthonormalize_rows,
    precision_context,
    rational_lift,
    real_matrix,
    to_mpfr,
)
from .errors import InconsistentOmega, NotPositiveDefinite, SingularMatrix
from .exactmat import RationalMatrix, det
from .siegel import SiegelParams, in_at, in_omega


def _leading_minors_positive(q: RationalMatrix) -> bool:
    n = q.n
    return all(det(RationalMatrix([row[:k] for row in q.rows[:k]])) > 0 for k in range(1, n + 1))


@dataclass(frozen=True, eq=False)
class SiegelTripleGLn:
    flag: RationalMatrix
    form: RationalMatrix
    t_squared: Fraction
    omega_samples: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "t_squared", Fraction(self.t_squared))
        if self.form != self.form.T:
            raise NotPositiveDefinite("form Q must be exactly symmetric")
        if not _leading_minors_positive(self.form):
            raise NotPositiveDefinite("form Q is not positive definite (leading minor test)")
        if det(self.flag) == 0:
            raise SingularMatrix("flag matrix g_P must be invertible")
        if self.flag.n != self.form.n:
            raise ValueError("flag and form dimensions differ")
        object.__setattr__(self, "omega_samples", tuple(self.omega_samples))

    @property
    def n(self) -> int:
        return self.flag.n

    def t(self, precision: int = DEFAULT_PRECISION) -> mpfr:
        with precision_context(precision):
            return gmpy2.sqrt(to_mpfr(self.t_squared, precision))

    @classmethod
    def from_json(cls, data, precision: int = DEFAULT_PRECISION) -> SiegelTripleGLn:
        """Fields: ``g_P`` and ``Q`` (exact strings), ``t`` (rational or ``"sqrt3over2"``),
        ``omega`` (list of matrices of decimal strings)."""
        if isinstance(data, str):
            data = json.loads(data)
        t_sq = SiegelParams.from_values(1, str(data.get("t", "sqrt3over2"))).t_squared
        omega = [real_matrix(w, precision) for w in data.get("omega", [])]
        flag = RationalMatrix.from_json(data["g_P"])
        if not omega:
            omega = [identity(flag.n, precision)]
        return cls(flag, RationalMatrix.from_json(data["Q"]), t_sq, tuple(omega))


@dataclass(frozen=True, eq=False)
class StandardizationResult:
    gamma_q: RationalMatrix
    tau: np.ndarray
    beta: np.ndarray
    u_prime: mpfr
    s: mpfr
    precision: int = DEFAULT_PRECISION

    @property
    def sigma(self) -> np.ndarray:
        with precision_context(self.precision):
            return self.tau @ diag(list(self.beta))

    def to_json(self) -> dict:
        fmt = lambda v: format_bigfloat(v, self.precision)  # noqa: E731
        return {
            "gamma_q": self.gamma_q.to_json(),
            "sigma": [[fmt(v) for v in row] for row in self.sigma],
            "tau": [[fmt(v) for v in row] for row in self.tau],
            "beta": [fmt(v) for v in self.beta],
            "u_prime": fmt(self.u_prime),
            "s": fmt(self.s),
        }


def transformed_form(triple: SiegelTripleGLn) -> RationalMatrix:
    """``Q' = g_P^T Q g_P``, the form whose orthogonal group is ``g_P^-1 K g_P``."""
    return triple.flag.T @ triple.form @ triple.flag


def standardize(triple: SiegelTripleGLn, precision: int = DEFAULT_PRECISION,
                tol=None) -> StandardizationResult:
    """Return ``gamma_q``, ``sigma = tau diag(beta)``, ``u'`` and ``s``.

    ``sigma`` is the upper triangular, positive-diagonal solution of
    ``sigma sigma^T = Q'^-1``, which makes ``sigma^-1 g_P^-1 K g_P sigma``
    the standard orthogonal group. ``u'`` is the largest strict-upper entry
    of ``g_P^-1 omega g_P tau`` over the Omega samples and
    ``s = t min_j beta_j / beta_{j+1}``.
    """
    n = triple.n
    gamma_q = triple.flag
    q_prime = transformed_form(triple)
    if not _leading_minors_positive(q_prime):
        raise NotPositiveDefinite("transformed form Q' is not positive definite")
    with precision_context(precision):
        tol = mpfr(2) ** -(precision // 2) if tol is None else mpfr(tol)
        try:
            tau, d = _udu(rational_lift(q_prime.inverse(), precision), eps_pivot(precision))
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(f"Q'^-1 is not numerically positive definite: {exc}") from None
        beta = np.array([gmpy2.sqrt(x) for x in d], dtype=object)
        g = rational_lift(gamma_q, precision)
        g_inv = rational_lift(gamma_q.inverse(), precision)
        u_prime = mpfr(0)
        for k, omega in enumerate(triple.omega_samples):
            conj = g_inv @ omega @ g
            _check_unit_upper(conj, tol, k)
            prod = conj @ tau
            for i in range(n):
                for j in range(i + 1, n):
                    u_prime = max(u_prime, abs(prod[i, j]))
        ratio = min((beta[j] / beta[j + 1] for j in range(n - 1)), default=mpfr(1))
        s = triple.t(precision) * ratio
        return StandardizationResult(gamma_q, tau, beta, u_prime, s, precision)


def random_triple(n: int, rng: np.random.Generator, precision: int = DEFAULT_PRECISION,
                  omega_count: int = 3, t="sqrt3over2") -> SiegelTripleGLn:
    """A well-formed random triple: integral ``g_P``, ``Q = A^T A + I`` and
    Omega samples ``g_P v g_P^-1`` with ``v`` unit upper triangular."""
    while True:
        flag = RationalMatrix(rng.integers(-3, 4, size=(n, n)).tolist())
        if det(flag) != 0:
            break
    a = RationalMatrix(rng.integers(-2, 3, size=(n, n)).tolist())
    ata = (a.T @ a).rows
    form = RationalMatrix([[ata[i][j] + (i == j) for j in range(n)] for i in range(n)])
    g = rational_lift(flag, precision)
    g_inv = rational_lift(flag.inverse(), precision)
    omegas = []
    with precision_context(precision):
        for _ in range(omega_count):
            v = identity(n, precision)
            for i in range(n):
                for j in range(i + 1, n):
                    v[i, j] = mpfr(float(rng.uniform(-1, 1)))
            omegas.append(g @ v @ g_inv)
    t_sq = SiegelParams.from_values(1, t).t_squared
    return SiegelTripleGLn(flag, form, t_sq, tuple(omegas))


def _check_unit_upper(m, tol, k):
    n = m.shape[0]
    for i in range(n):
        if abs(m[i, i] - 1) > tol or any(abs(m[i, j]) > tol for j in range(i)):
            raise InconsistentOmega(
                f"omega sample {k} does not lie in the unipotent radical of the given flag "
                f"(g_P^-1 omega g_P is not unit upper triangular within {float(tol):.3g})")


def cholesky_lower(a: np.ndarray) -> np.ndarray:
    """Plain lower Cholesky factor ``L`` with ``L L^T = a``."""
    n = a.shape[0]
    low = np.empty((n, n), dtype=object)
    low.fill(mpfr(0))
    for j in range(n):
        s = a[j, j] - sum(low[j, k] ** 2 for k in range(j))
        if not s > 0:
            raise NotPositiveDefinite(f"Cholesky pivot {j + 1} is {s}")
        low[j, j] = gmpy2.sqrt(s)
        for i in range(j + 1, n):
            low[i, j] = (a[i, j] - sum(low[i, k] * low[j, k] for k in range(j))) / low[j, j]
    return low


def _lower_inverse(low: np.ndarray) -> np.ndarray:
    n = low.shape[0]
    inv = np.empty((n, n), dtype=object)
    inv.fill(mpfr(0))
    for j in range(n):
        inv[j, j] = 1 / low[j, j]
        for i in range(j + 1, n):
            inv[i, j] = -sum(low[i, k] * inv[k, j] for k in range(j, i)) / low[i, i]
    return inv


def random_orthogonal(n: int, rng: np.random.Generator, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Orthonormalized rows of a standard-normal matrix."""
    return orthonormalize_rows(real_matrix(rng.standard_normal((n, n)).tolist(), precision), precision)


def sample_compact(form: RationalMatrix, rng, precision: int = DEFAULT_PRECISION,
                   rotation=None) -> np.ndarray:
    """An element ``k = L r L^-1`` of ``O(Q)``, where ``L L^T = Q^-1`` and r is orthogonal."""
    with precision_context(precision):
        low = cholesky_lower(rational_lift(form.inverse(), precision))
        r = random_orthogonal(form.n, rng, precision) if rotation is None else rotation
        return low @ r @ _lower_inverse(low)


def torus_element(q_prime: RationalMatrix, alpha0, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """The unique upper triangular ``A`` with diagonal ``alpha0`` and ``Q' A`` symmetric.

    These matrices form the positive part of the torus attached to the
    standard flag and the form ``Q'``; solved column by column.
    """
    n = q_prime.n
    with precision_context(precision):
        qp = rational_lift(q_prime, precision)
        a = np.empty((n, n), dtype=object)
        a.fill(mpfr(0))
        for i in range(n):
            a[i, i] = alpha0[i]
        # (Q'A)_{ij} = (Q'A)_{ji} for i < j; unknowns A_{kj} (k < j) of column j
        # appear in row i of (Q'A)_{:,j}, while (Q'A)_{ji} only involves columns <= i < j.
        for j in range(1, n):
            rhs = np.empty(j, dtype=object)
            mat = np.empty((j, j), dtype=object)
            for i in range(j):
                known = sum(qp[j, k] * a[k, i] for k in range(i + 1))
                rhs[i] = known - qp[i, j] * a[j, j]
                for k in range(j):
                    mat[i, k] = qp[i, k]
            a[:j, j] = _solve(mat, rhs)
        return a


def _solve(mat, rhs):
    """Gaussian elimination with partial pivoting on object arrays."""
    n = len(rhs)
    m = [list(mat[i]) + [rhs[i]] for i in range(n)]
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(m[r][k]))
        m[k], m[piv] = m[piv], m[k]
        for r in range(k + 1, n):
            f = m[r][k] / m[k][k]
            m[r] = [x - f * y for x, y in zip(m[r], m[k])]
    x = [mpfr(0)] * n
    for k in range(n - 1, -1, -1):
        x[k] = (m[k][n] - sum(m[k][c] * x[c] for c in range(k + 1, n))) / m[k][k]
    return x


@dataclass
class ContainmentReport:
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def _alpha_grid(n, t, count, rng):
    """Points of A_t on boundary rays: every ratio is t or t*exp(lambda), lambda on a log grid."""
    levels = [mpfr(0)] + [gmpy2.log(mpfr(2)) * (2 ** k) for k in range(-2, 4)]
    out = []
    for idx in range(count):
        ratios = []
        for j in range(n - 1):
            lam = levels[0] if (idx >> j) & 1 == 0 else levels[int(rng.integers(1, len(levels)))]
            ratios.append(t * gmpy2.exp(lam))
        scale = gmpy2.exp(mpfr(float(rng.uniform(-3, 3))))
        alpha = [scale]
        for rho in ratios:
            alpha.append(alpha[-1] / rho)
        out.append(alpha)
    return out


def verify_containment(triple: SiegelTripleGLn, result: StandardizationResult, grid: int = 100,
                       seed: int = 0, margin=0.05, tol=1e-20,
                       precision: int | None = None) -> ContainmentReport:
    """Check that ``gamma^-1 (omega alpha kappa) gamma sigma`` lands in the standard set
    ``Omega_{u'+margin} A_{s(1-margin)} K0`` over a grid of samples.

    The torus elements ``alpha`` are rebuilt from the triple alone (not from
    ``sigma``), and ``kappa`` ranges over ``O(Q)`` via ``L r L^-1``; the first
    grid point uses ``r = I``.
    """
    precision = precision or result.precision
    rng = np.random.default_rng(seed)
    n = triple.n
    q_prime = transformed_form(triple)
    failures = []
    with precision_context(precision):
        margin = mpfr(margin)
        u_bound = result.u_prime + margin
        s_bound = result.s * (1 - margin)
        g = rational_lift(result.gamma_q, precision)
        g_inv = rational_lift(result.gamma_q.inverse(), precision)
        sigma = result.sigma
        alphas = _alpha_grid(n, triple.t(precision), grid, rng)
        eye = identity(n, precision)
        omegas = triple.omega_samples or (eye,)
        for idx, alpha0 in enumerate(alphas):
            omega = omegas[idx % len(omegas)]
            torus = g @ torus_element(q_prime, alpha0, precision) @ g_inv
            kappa = sample_compact(triple.form, rng, precision, rotation=eye if idx == 0 else None)
            element = g_inv @ (omega @ torus @ kappa) @ g @ sigma
            ok, dec = _membership(element, u_bound, s_bound, tol, precision)
            if not ok:
                failures.append({"index": idx, "nu_max": _strict_upper_max(dec.nu),
                                 "min_ratio": min((dec.alpha[j] / dec.alpha[j + 1] for j in range(n - 1)),
                                                  default=mpfr(1))})
    return ContainmentReport(len(alphas), failures)


def _membership(element, u_bound, t_bound, tol, precision):
    dec = iwasawa(element, precision)
    with precision_context(precision):
        return in_omega(dec.nu, u_bound, tol) and in_at(dec.alpha, t_bound, tol), dec


def _strict_upper_max(nu):
    n = nu.shape[0]
    return max((abs(nu[i, j]) for i in range(n) for j in range(i + 1, n)), default=mpfr(0))


def perturbed(result: StandardizationResult, factor=0.9) -> StandardizationResult:
    """Copy of ``result`` with the beta entry at the tightest ratio scaled by ``factor``.

    Used as a negative control: the conjugated compact group is no longer O_n.
    """
    n = len(result.beta)
    with precision_context(result.precision):
        beta = result.beta.copy()
        j = min(range(n - 1), key=lambda k: beta[k] / beta[k + 1]) if n > 1 else 0
        beta[j] = beta[j] * mpfr(factor)
    return replace(result, beta=beta)
