"""Witnessed elements of S.S^-1 in GL_n(Q) and the lemma-by-lemma height audit.

An element is produced together with its certificate: a point
``x = mu alpha kappa2`` of the Siegel set and ``gamma`` with ``gamma x`` in the
Siegel set, so that ``gamma mu alpha = nu beta kappa`` holds with
``mu, nu`` in Omega_u, ``alpha, beta`` in A_t and ``kappa`` orthogonal.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .decomp import (
    DEFAULT_PRECISION,
    diag,
    format_bigfloat,
    identity,
    max_abs,
    orthonormalize_rows,
    precision_context,
    rational_lift,
    real_matrix,
    to_mpfr,
)
from .errors import DomainError, PrecisionExhausted, RetriesExhausted
from .exactmat import RationalMatrix, denominator, det, height
from .segments import leading_entries, segment_partition
from .siegel import SiegelParams, in_siegel, reduce_to_siegel

LOG_RATIO_BAND = 2.0
DEFAULT_RETRIES = 1000


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` may be an int or a SeedSequence."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def _as_seedseq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))


def sample_siegel_point(n: int, params: SiegelParams, seed, precision: int = DEFAULT_PRECISION,
                        band: float = LOG_RATIO_BAND):
    """Random ``(mu, alpha, kappa2)`` with ``mu alpha kappa2`` in the Siegel set.

    Strict-upper entries of ``mu`` are uniform in [-u, u]; the log-ratios
    ``log(alpha_j/alpha_{j+1})`` are uniform in [log t, log t + band] with
    ``alpha_n = 1``; ``kappa2`` orthonormalizes a standard-normal matrix.
    """
    rng = make_rng(seed)
    u = float(params.u)
    with precision_context(precision):
        mu = identity(n, precision)
        for i in range(n):
            for j in range(i + 1, n):
                mu[i, j] = mpfr(float(rng.uniform(-u, u)))
        log_t = gmpy2.log(params.t(precision))
        alpha = [mpfr(1)]
        for _ in range(n - 1):
            alpha.insert(0, alpha[0] * gmpy2.exp(log_t + mpfr(float(rng.uniform(0.0, band)))))
        kappa2 = orthonormalize_rows(real_matrix(rng.standard_normal((n, n)).tolist(), precision), precision)
        return mu, np.array(alpha, dtype=object), kappa2


def _factorize(k: int) -> dict[int, int]:
    out = {}
    p = 2
    while p * p <= k:
        while k % p == 0:
            out[p] = out.get(p, 0) + 1
            k //= p
        p += 1
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


def _elementary_word(n: int, length: int, rng) -> list[list[int]]:
    w = [[int(i == j) for j in range(n)] for i in range(n)]
    if n == 1:
        return w
    for _ in range(length):
        i, j = rng.choice(n, size=2, replace=False)
        s = 1 if rng.integers(2) else -1
        w[i] = [a + s * b for a, b in zip(w[i], w[j])]
    return w


def _int_matmul(a, b):
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def sample_rational_map(n: int, N: int, D: int, seed, word_length: int | None = None,
                        max_retries: int = DEFAULT_RETRIES) -> RationalMatrix:
    """Random ``m = M / D`` with ``M`` integral, ``|det m| = N`` and denominator exactly ``D``.

    ``M = U1 T U2`` where ``T`` is upper triangular with positive diagonal of
    product ``N D^n`` (prime powers dealt out at random) and entries above
    each pivot uniform in [0, pivot); ``U1, U2`` are random words of
    ``word_length`` elementary matrices.
    """
    if N < 1 or D < 1:
        raise DomainError(f"need N >= 1 and D >= 1, got N={N}, D={D}")
    rng = make_rng(seed)
    word_length = 2 * n if word_length is None else word_length
    target = N * D ** n
    primes = _factorize(target)
    for _ in range(max_retries):
        diag_entries = [1] * n
        for p, e in primes.items():
            for _ in range(e):
                diag_entries[int(rng.integers(n))] *= p
        t = [[0] * n for _ in range(n)]
        for i in range(n):
            t[i][i] = diag_entries[i]
            for j in range(i + 1, n):
                t[i][j] = int(rng.integers(diag_entries[j]))
        big = _int_matmul(_int_matmul(_elementary_word(n, word_length, rng), t),
                          _elementary_word(n, word_length, rng))
        m = RationalMatrix(big).scale(Fraction(1, D))
        if denominator(m) == D:
            return m
    raise RetriesExhausted(f"no map with denominator exactly {D} found in {max_retries} attempts (N={N}, n={n})")


@dataclass(frozen=True, eq=False)
class WitnessedElement:
    gamma: RationalMatrix
    n: int
    N: Fraction
    D: int
    mu: np.ndarray
    alpha: np.ndarray
    nu: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    kappa2: np.ndarray
    params: SiegelParams
    precision: int = DEFAULT_PRECISION
    seed: int | None = None

    def lhs(self) -> np.ndarray:
        """``gamma mu alpha``."""
        with precision_context(self.precision):
            return rational_lift(self.gamma, self.precision) @ self.mu @ diag(list(self.alpha))

    def rhs(self) -> np.ndarray:
        """``nu beta kappa``."""
        with precision_context(self.precision):
            return self.nu @ diag(list(self.beta)) @ self.kappa

    def eq2_residual(self) -> mpfr:
        with precision_context(self.precision):
            return max_abs(self.lhs() - self.rhs())


def generate_witnessed(n: int, N: int, D: int, params: SiegelParams | None = None, seed=0,
                       precision: int = DEFAULT_PRECISION, tol=1e-12,
                       word_length: int | None = None) -> WitnessedElement:
    """Draw ``x`` in the Siegel set and a map ``m``, reduce ``m x`` by ``delta``,
    and return ``gamma = delta m`` with its decomposition data."""
    params = params or SiegelParams.fundamental()
    if not params.is_fundamental:
        raise DomainError("generate_witnessed needs u >= 1/2 and t <= sqrt(3)/2")
    point_seed, map_seed = _as_seedseq(seed).spawn(2)
    mu, alpha, kappa2 = sample_siegel_point(n, params, point_seed, precision)
    m = sample_rational_map(n, N, D, map_seed, word_length=word_length)
    with precision_context(precision):
        mu_alpha = mu @ diag(list(alpha))
        y = rational_lift(m, precision) @ mu_alpha @ kappa2
    delta, _ = reduce_to_siegel(y, params, tol, precision)
    gamma = delta @ m
    with precision_context(precision):
        lhs = rational_lift(gamma, precision) @ mu_alpha
    ok, dec = in_siegel(lhs, params, tol, precision)
    if not ok:
        raise PrecisionExhausted("gamma mu alpha could not be certified in the Siegel set")
    return WitnessedElement(
        gamma=gamma, n=n, N=abs(det(gamma)), D=denominator(gamma),
        mu=mu, alpha=alpha, nu=dec.nu, beta=dec.alpha,
        kappa=dec.kappa, kappa2=kappa2, params=params, precision=precision,
        seed=int(seed) if not isinstance(seed, np.random.SeedSequence) else None,
    )


REPORT_FIELDS = ("r32", "r33", "r34", "r35", "r36", "r37", "rH")


@dataclass(frozen=True)
class LemmaReport:
    """Ratios whose boundedness the height argument asserts, plus self-checks.

    ``r32``: leading entries (i, j), alpha_j / (D beta_i).
    ``r33``: alpha_k / (D beta_k).
    ``r34``: over nonempty J, prod_J beta / (N D^(n-#J) prod_J alpha).
    ``r35``: same-segment (i, j), beta_j / (N D^(n-1) alpha_i).
    ``r36``: largest |kappa_pq| with p, q in different segments.
    ``r37``: max |gamma_ij| / (N D^(n-1)).
    ``rH``: H(gamma) / max(N D^n, D).
    """

    r32: mpfr
    r33: mpfr
    r34: mpfr
    r35: mpfr
    r36: mpfr
    r37: mpfr
    rH: mpfr
    r34_full: mpfr
    eq2_residual: mpfr
    eq4_residual: mpfr
    det_residual: mpfr

    def values(self) -> dict:
        return asdict(self)


def verify_lemmas(w: WitnessedElement) -> LemmaReport:
    n, p = w.n, w.precision
    gamma = w.gamma
    lead = leading_entries(gamma)
    part = segment_partition(gamma)
    seg = [part.segment_of(k) for k in range(1, n + 1)]
    with precision_context(p):
        alpha, beta = list(w.alpha), list(w.beta)
        N = to_mpfr(Fraction(w.N), p)
        D = mpfr(w.D)
        r32 = max(alpha[j - 1] / (D * beta[i - 1]) for i, j in lead)
        r33 = max(alpha[k] / (D * beta[k]) for k in range(n))
        r34 = mpfr(0)
        r34_full = None
        for size in range(1, n + 1):
            for J in combinations(range(n), size):
                num = math.prod((beta[j] for j in J), start=mpfr(1))
                den = N * D ** (n - size) * math.prod((alpha[j] for j in J), start=mpfr(1))
                r = num / den
                r34 = max(r34, r)
                if size == n:
                    r34_full = r
        r35 = max(beta[j] / (N * D ** (n - 1) * alpha[i])
                  for i in range(n) for j in range(n) if seg[i] == seg[j])
        r36 = max((abs(w.kappa[a, b]) for a in range(n) for b in range(n) if seg[a] != seg[b]),
                  default=mpfr(0))
        max_entry = max(abs(Fraction(x)) for row in gamma.rows for x in row)
        r37 = to_mpfr(max_entry, p) / (N * D ** (n - 1))
        h = height(gamma)
        rH = to_mpfr(Fraction(h) / max(Fraction(w.N) * w.D ** n, Fraction(w.D)), p)

        lhs, rhs = w.lhs(), w.rhs()
        eq2 = max_abs(lhs - rhs)
        # squared row lengths of gamma mu alpha versus nu beta (kappa drops out)
        g_mu = rational_lift(gamma, p) @ w.mu
        eq4 = mpfr(0)
        for i in range(n):
            left = sum((g_mu[i, q] ** 2 * alpha[q] ** 2 for q in range(n)), mpfr(0))
            right = sum((w.nu[i, q] ** 2 * beta[q] ** 2 for q in range(n)), mpfr(0))
            eq4 = max(eq4, abs(left - right) / right)
        prod_a = math.prod(alpha, start=mpfr(1))
        det_res = abs(math.prod(beta, start=mpfr(1)) - N * prod_a) / (N * prod_a)
        return LemmaReport(r32, r33, r34, r35, r36, r37, rH, r34_full, eq2, eq4, det_res)


@dataclass(frozen=True)
class ExperimentRecord:
    seed: int
    n: int
    N: Fraction
    D: int
    H: int
    report: LemmaReport
    ms: float | None = None
    gamma: RationalMatrix | None = field(default=None, compare=False)

    CSV_COLUMNS = ("seed", "n", "N", "D", "H") + REPORT_FIELDS + ("ms",)

    def csv_row(self, precision: int = DEFAULT_PRECISION) -> list[str]:
        vals = self.report.values()
        return ([str(self.seed), str(self.n), _fmt_rational(self.N), str(self.D), str(self.H)]
                + [format_bigfloat(vals[f], precision) for f in REPORT_FIELDS]
                + ["" if self.ms is None else f"{self.ms:.3f}"])

    def to_json(self, precision: int = DEFAULT_PRECISION, emit_matrices: bool = False) -> dict:
        out = {"seed": self.seed, "n": self.n, "N": _fmt_rational(self.N), "D": self.D, "H": self.H,
               "ms": self.ms}
        out.update({k: format_bigfloat(v, precision) for k, v in self.report.values().items()})
        if emit_matrices and self.gamma is not None:
            out["gamma"] = self.gamma.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict, precision: int = DEFAULT_PRECISION) -> ExperimentRecord:
        with precision_context(precision):
            report = LemmaReport(**{k: mpfr(data[k], precision) for k in LemmaReport.__dataclass_fields__})
        gamma = RationalMatrix.from_json(data["gamma"]) if "gamma" in data else None
        return cls(int(data["seed"]), int(data["n"]), Fraction(data["N"]), int(data["D"]), int(data["H"]),
                   report, data.get("ms"), gamma)


def _fmt_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def draw_from_law(law: dict, rng: np.random.Generator, index: int = 0) -> int:
    """Integer laws: ``fixed`` (value), ``range`` (uniform low..high),
    ``loguniform`` (low..high), ``choice`` (values), ``grid`` (low..high in
    turn by sample index, so each value gets samples/(high-low+1) draws)."""
    kind = law.get("law", "fixed")
    if kind == "fixed":
        return int(law["value"])
    if kind == "grid":
        lo, hi = int(law["low"]), int(law["high"])
        return lo + index % (hi - lo + 1)
    if kind == "range":
        return int(rng.integers(int(law["low"]), int(law["high"]) + 1))
    if kind == "loguniform":
        lo, hi = math.log(law["low"]), math.log(law["high"] + 1)
        return min(int(math.exp(rng.uniform(lo, hi))), int(law["high"]))
    if kind == "choice":
        values = list(law["values"])
        return int(values[int(rng.integers(len(values)))])
    raise ValueError(f"unknown law {kind!r}")


@dataclass
class ExperimentConfig:
    """``samples`` is the number of draws per entry of ``n_values``."""

    n_values: list = field(default_factory=lambda: [2])
    N_law: dict = field(default_factory=lambda: {"law": "loguniform", "low": 1, "high": 1000})
    D_law: dict = field(default_factory=lambda: {"law": "fixed", "value": 1})
    samples: int = 10
    seed: int = 0
    u: str = "1/2"
    t: str = "sqrt3over2"
    precision: int = DEFAULT_PRECISION
    threads: int = 1
    timing: bool = False
    tol: float = 1e-12
    word_length: int | None = None

    @property
    def params(self) -> SiegelParams:
        return SiegelParams.from_values(self.u, self.t)

    @classmethod
    def from_json(cls, data) -> ExperimentConfig:
        if isinstance(data, str):
            data = json.loads(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("u", "t"):
            if key in data:
                data[key] = str(data[key])
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)

    def sample_plan(self) -> list[tuple[int, int, int, int]]:
        """Deterministic list of ``(sample_seed, n, N, D)``; one entry per sample."""
        plan = []
        idx = 0
        for n in self.n_values:
            for k in range(self.samples):
                state = np.random.SeedSequence(self.seed, spawn_key=(idx,)).generate_state(2, np.uint64)
                law_rng = make_rng(int(state[1]))
                N = draw_from_law(self.N_law, law_rng, k)
                D = draw_from_law(self.D_law, law_rng, k)
                plan.append((int(state[0]), int(n), N, D))
                idx += 1
        return plan


def run_sample(sample_seed: int, n: int, N: int, D: int, config: ExperimentConfig) -> ExperimentRecord:
    start = time.perf_counter()
    w = generate_witnessed(n, N, D, config.params, sample_seed, config.precision, config.tol,
                           word_length=config.word_length)
    report = verify_lemmas(w)
    ms = (time.perf_counter() - start) * 1000 if config.timing else None
    return ExperimentRecord(sample_seed, n, w.N, w.D, height(w.gamma), report, ms, w.gamma)


def loglog_slope(xs, ys) -> float:
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if len(lx) < 2 or np.ptp(lx) == 0:
        return math.nan
    return float(np.polyfit(lx, ly, 1)[0])


def envelope_slope(xs, ys, bins: int = 12) -> float:
    """Slope of the upper envelope: per log-spaced bin of x, the largest y."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or np.ptp(xs) == 0:
        return math.nan
    edges = np.geomspace(xs.min(), xs.max() * (1 + 1e-12), bins + 1)
    bx, by = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (xs >= lo) & (xs < hi)
        if mask.any():
            k = np.argmax(np.where(mask, ys, -np.inf))
            bx.append(xs[k])
            by.append(ys[k])
    return loglog_slope(bx, by)


def summarize(records: list[ExperimentRecord], failures: list | None = None) -> dict:
    """Maxima of every report field and per-(n, D) fits of log H against log N."""
    if not records:
        return {"count": 0, "defined": False, "failures": failures or []}
    maxima = {f: max(getattr(r.report, f) for r in records) for f in REPORT_FIELDS}
    maxima.update({f: max(getattr(r.report, f) for r in records)
                   for f in ("eq2_residual", "eq4_residual", "det_residual")})
    fits = {}
    for key in sorted({(r.n, r.D) for r in records}):
        sub = [r for r in records if (r.n, r.D) == key]
        ns = [float(r.N) for r in sub]
        hs = [r.H for r in sub]
        fits[f"n={key[0]},D={key[1]}"] = {
            "count": len(sub),
            "slope": loglog_slope(ns, hs),
            "envelope_slope": envelope_slope(ns, hs),
            "c1_estimate": float(max(r.report.rH for r in sub)),
        }
    return {"count": len(records), "defined": True, "maxima": maxima, "fits": fits,
            "failures": failures or []}


def run_experiment(config: ExperimentConfig):
    """Run every planned sample; records come back in plan order whatever ``threads`` is.

    Samples whose certificate fails (``PrecisionExhausted``/``RetriesExhausted``)
    are skipped and listed in ``summary["failures"]`` with their seed.
    """
    plan = config.sample_plan()

    def task(item):
        try:
            return run_sample(*item, config)
        except (PrecisionExhausted, RetriesExhausted) as exc:
            return {"seed": item[0], "n": item[1], "N": item[2], "D": item[3], "error": str(exc)}

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(task, plan))
    else:
        results = [task(item) for item in plan]
    records = [r for r in results if isinstance(r, ExperimentRecord)]
    failures = [r for r in results if not isinstance(r, ExperimentRecord)]
    return records, summarize(records, failures)
