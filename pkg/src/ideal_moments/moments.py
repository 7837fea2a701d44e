"""First and second moments of S(x, I) = sum_{N(J) <= x} C_J(I) over N(I) <= y.

Substituting the divisor form of C_J(I) and reordering gives

    S(x, I) = sum_{D | I, N(D) <= x} N(D) M_K(x / N(D)),

with M_K the ideal Mertens function.  Only prime ideals of norm <= x can
divide such a D, so S(x, I) depends on I only through its x-smooth part A.
Writing I = A B with B free of those primes, the moment sums become

    sum_{A smooth, N(A) <= y} S(x, A)^k * R(y / N(A)),

where R(t) counts x-rough ideals of norm <= t.  All accumulation is in
Python integers, so results are exact and independent of how the smooth
ideals are split between worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
import multiprocessing

import numpy as np

from . import analytic
from .arith import ZParam, divisor_coeff_table, mertens_table, pair_coeff_table, ramanujan_sum_divisor
from .errors import DegenerateInputError, TableCoverageError
from .field import CYCLOTOMIC, NumberField
from .ideals import (
    DEFAULT_MAX_TABLE_N,
    CoefficientTable,
    Ideal,
    enumerate_ideals,
    ideal_divisors,
    iter_factorizations,
    prime_ideals_up_to,
    rough_count_table,
)

DEFAULT_SEED = 20240917
PARALLEL_THRESHOLD = 4096
_INT128_MAX = 2**127 - 1


@dataclass
class MomentResult:
    field: str
    x: int
    y: int | None
    kind: str
    empirical: int | float
    predicted: float | None
    residual: float | None
    normalized_residual: float | None
    regime: str = ""
    c2: float | None = None
    seed: int = DEFAULT_SEED
    runtime_ms: float | None = None
    extras: dict = dc_field(default_factory=dict)


# ---------------------------------------------------------------------------
# inner sums
# ---------------------------------------------------------------------------


def inner_sum(
    K: NumberField, x: int, I: Ideal, method: str = "mertens", mertens: CoefficientTable | None = None
) -> int:
    """S(x, I) = sum_{0 < N(J) <= x} C_J(I)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if method == "brute":
        return sum(ramanujan_sum_divisor(J, I) for J in enumerate_ideals(K, x))
    if method != "mertens":
        raise ValueError(f"unknown method {method!r}")
    if mertens is None:
        mertens = mertens_table(K, x)
    elif mertens.N < x:
        raise TableCoverageError(f"Mertens table covers {mertens.N} < x = {x}")
    M = mertens.values
    return sum(D.norm * int(M[x // D.norm]) for D in ideal_divisors(I) if D.norm <= x)


def _smooth_inner_sum(exps, norms, M, x) -> int:
    total = 0
    stack = [(0, 1)]
    n = len(exps)
    while stack:
        pos, d = stack.pop()
        if pos == n:
            total += d * M[x // d]
            continue
        i, k = exps[pos]
        q = norms[i]
        for _ in range(k + 1):
            if d > x:
                break
            stack.append((pos + 1, d))
            d *= q
    return total


class _Engine:
    """Smooth-part enumeration shared by the first and second moments."""

    def __init__(self, K, x, y, max_n=DEFAULT_MAX_TABLE_N, mertens=None, rough=None):
        self.K, self.x, self.y = K, x, y
        if mertens is None:
            mertens = mertens_table(K, x, max_n)
        elif mertens.N < x:
            raise TableCoverageError(f"Mertens table covers {mertens.N} < x = {x}")
        self.M = [int(v) for v in mertens.values[: x + 1]]
        primes = prime_ideals_up_to(K, x)
        self.norms = [P.norm for P in primes]
        self.kcap = [int(math.log(x) / math.log(q)) + 1 for q in self.norms]
        if rough is None:
            rough = rough_count_table(K, x, y, max_n).cumulative()
        elif rough.N < y:
            raise TableCoverageError(f"rough-count table covers {rough.N} < y = {y}")
        self.rough = rough.values

    def items(self):
        fs = list(iter_factorizations(self.norms, self.y))
        fs.sort()
        return fs

    def weights(self, items) -> list[int]:
        idx = self.y // np.array([n for n, _ in items], dtype=np.int64)
        return [int(v) for v in self.rough[idx]]


def _partial_moments(norms, kcap, M, x, items, weights):
    memo: dict = {}
    s1 = s2 = 0
    for (n, exps), w in zip(items, weights):
        key = tuple((i, k if k < kcap[i] else kcap[i]) for i, k in exps)
        S = memo.get(key)
        if S is None:
            S = memo[key] = _smooth_inner_sum(key, norms, M, x)
        s1 += S * w
        s2 += S * S * w
    return s1, s2


def _chunks(seq, k):
    size = -(-len(seq) // k)
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def moment_sums(
    K: NumberField,
    x: int,
    y: int,
    workers: int = 1,
    max_n: int = DEFAULT_MAX_TABLE_N,
    mertens: CoefficientTable | None = None,
    rough: CoefficientTable | None = None,
) -> tuple[int, int]:
    """Exact (sum_I S(x, I), sum_I S(x, I)^2) over 0 < N(I) <= y.

    ``mertens`` (covering x) and ``rough`` (cumulative x-rough counts covering
    y) may be supplied from a cache; otherwise they are sieved here.
    """
    if x < 1 or y < 1:
        raise ValueError("x and y must be >= 1")
    eng = _Engine(K, x, y, max_n, mertens, rough)
    items = eng.items()
    weights = eng.weights(items)
    args = (eng.norms, eng.kcap, eng.M, x)
    if workers <= 1 or len(items) < PARALLEL_THRESHOLD:
        s1, s2 = _partial_moments(*args, items, weights)
    else:
        ctx = multiprocessing.get_context("fork")
        parts = list(zip(_chunks(items, workers), _chunks(weights, workers)))
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = [pool.submit(_partial_moments, *args, it, wt) for it, wt in parts]
            results = [f.result() for f in futures]
        s1 = sum(r[0] for r in results)
        s2 = sum(r[1] for r in results)
    if abs(s2) > _INT128_MAX:
        raise OverflowError("second moment exceeds the 128-bit accumulator contract")
    return s1, s2


def moment_sums_direct(K: NumberField, x: int, y: int, method: str = "mertens") -> tuple[int, int]:
    """Same sums by visiting every ideal of norm <= y (``method`` = mertens | brute)."""
    Is = enumerate_ideals(K, y)
    if method == "brute":
        Js = enumerate_ideals(K, x)
        S = [sum(ramanujan_sum_divisor(J, I) for J in Js) for I in Is]
    else:
        mert = mertens_table(K, x)
        S = [inner_sum(K, x, I, "mertens", mert) for I in Is]
    return sum(S), sum(s * s for s in S)


# ---------------------------------------------------------------------------
# error scales
# ---------------------------------------------------------------------------


def first_error_scale(x: float, y: float) -> float:
    return x * math.sqrt(y) * math.log(x)


def second_error_scale(x: float, y: float) -> float:
    return y * x**1.5


def cyclotomic_error_scale(K: NumberField, x: float, y: float) -> float:
    """Cyclotomic error terms, reading the exponents as 2 - 1/(4 phi) and 5/2 - 1/(2 phi)."""
    phi = K.degree
    L = math.log(x) if x > 1 else 0.0
    out = x ** (2 - 1 / (4 * phi)) * y * L ** (4 * phi + 1) + x**2 * y ** (5 / 6) * L ** (4 * phi)
    if y > x * x:
        out += x ** (2.5 - 1 / (2 * phi)) * math.sqrt(y) * L ** (4 * phi)
    return out


def pair_error_exponent(K: NumberField, z1: float, z2: float) -> float:
    return (1 + z1 + z2) / 2 - 2 * z2 * K.degree


def _normalize(residual, scale):
    if residual is None or not scale:
        return None
    return residual / scale


# ---------------------------------------------------------------------------
# moment experiments
# ---------------------------------------------------------------------------


def first_moment(
    K: NumberField, x: int, y: int, workers: int = 1, seed: int = DEFAULT_SEED, tables: dict | None = None
) -> MomentResult:
    t0 = time.perf_counter()
    s1, _ = moment_sums(K, x, y, workers, **(tables or {}))
    pred = analytic.main_term_first(K, x, y)
    res = s1 - pred
    return MomentResult(
        str(K), x, y, "first", s1, pred, res, _normalize(res, first_error_scale(x, y)),
        regime="y>x^2" if y > x * x else "y<=x^2", seed=seed,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


def second_moment(
    K: NumberField,
    x: int,
    y: int,
    regime: str | None = None,
    c2: float = 0.5,
    workers: int = 1,
    seed: int = DEFAULT_SEED,
    tables: dict | None = None,
) -> MomentResult:
    """Exact sum of S(x, I)^2 with predictions from both regimes and both conventions."""
    t0 = time.perf_counter()
    _, s2 = moment_sums(K, x, y, workers, **(tables or {}))
    natural = analytic.crossover_regime(x, y)
    regime = regime or natural
    scale = second_error_scale(x, y)
    pred = analytic.main_term_second(K, x, y, regime, c2)
    res = s2 - pred
    extras = {"natural_regime": natural, "near_boundary": 0.5 <= y / x**2.5 <= 2.0}
    residuals = {}
    for conv in (1, 0.5):
        for reg in ("below", "above"):
            p = conv * analytic.constants(K).rho ** 2 / analytic.constants(K).zeta2 * y * x * x
            if reg == "below":
                p += analytic.x4_term(K, x)
            residuals[(conv, reg)] = s2 - p
            extras[f"predicted_c2={conv}_{reg}"] = p
            extras[f"normalized_residual_c2={conv}_{reg}"] = (s2 - p) / scale
    full = abs(residuals[(1, "above")])
    extras["c2_ratio"] = abs(residuals[(0.5, "above")]) / full if full else math.inf
    if K.kind == CYCLOTOMIC:
        c = analytic.constants(K)
        if y < x * x:
            p3 = analytic.x4_term(K, x)
        else:
            p3 = 0.5 * c.rho**2 / c.zeta2 * y * x * x
        extras["predicted_cyclotomic"] = p3
        extras["normalized_residual_cyclotomic"] = (s2 - p3) / cyclotomic_error_scale(K, x, y)
        extras["cyclotomic_note"] = "exponents read as 2-1/(4phi(m)) and 5/2-1/(2phi(m))"
    return MomentResult(
        str(K), x, y, "second", s2, pred, res, res / scale, regime=regime, c2=c2, seed=seed,
        runtime_ms=(time.perf_counter() - t0) * 1e3, extras=extras,
    )


def _covering(table, x):
    if table.N < x:
        raise TableCoverageError(f"table {table.tag} covers {table.N} < x = {x}")
    return table


def avg_sigma(K: NumberField, x: int, z, max_n: int = DEFAULT_MAX_TABLE_N, table: CoefficientTable | None = None):
    """sum_{0 < N(I) <= x} sigma_{K,z}(I)."""
    table = _covering(table, x) if table is not None else divisor_coeff_table(K, x, z, max_n)
    return table.partial_sum(x)


def avg_sigma_pair(
    K: NumberField, x: int, z1, z2, max_n: int = DEFAULT_MAX_TABLE_N, table: CoefficientTable | None = None
):
    """sum_{0 < N(I) <= x} sigma_{K,z1}(I) sigma_{K,z2}(I)."""
    table = _covering(table, x) if table is not None else pair_coeff_table(K, x, z1, z2, max_n)
    return table.partial_sum(x)


def _real_z(z) -> float | None:
    zp = ZParam.of(z)
    return float(complex(zp.value).real) if zp.is_real else None


def avg_sigma_result(
    K: NumberField, x: int, z, seed: int = DEFAULT_SEED, table: CoefficientTable | None = None
) -> MomentResult:
    t0 = time.perf_counter()
    emp = avg_sigma(K, x, z, table=table)
    zr = _real_z(z)
    pred = res = norm = None
    if zr is not None and -0.5 < zr < 0:
        pred = analytic.lemma31_main(K, x, zr)
        res = float(emp) - pred
        norm = res / x**0.5
    return MomentResult(
        str(K), x, None, "avg-sigma", emp, pred, res, norm, regime=f"z={ZParam.of(z)}", seed=seed,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


def avg_sigma_pair_result(
    K: NumberField, x: int, z1, z2, seed: int = DEFAULT_SEED, table: CoefficientTable | None = None
) -> MomentResult:
    t0 = time.perf_counter()
    emp = avg_sigma_pair(K, x, z1, z2, table=table)
    a1, a2 = _real_z(z1), _real_z(z2)
    pred = res = norm = None
    extras = {}
    if a1 is not None and a2 is not None:
        try:
            pred = analytic.r0_main(K, x, a1, a2)
        except ValueError:
            pred = None
        if pred is not None:
            res = float(emp) - pred
            expo = pair_error_exponent(K, a1, a2)
            norm = res / x**expo
            extras["error_exponent"] = expo
    return MomentResult(
        str(K), x, None, "avg-sigma-pair", emp, pred, res, norm,
        regime=f"z1={ZParam.of(z1)},z2={ZParam.of(z2)}", seed=seed,
        runtime_ms=(time.perf_counter() - t0) * 1e3, extras=extras,
    )


def fit_error_exponent(points) -> tuple[float, float, float]:
    """Least-squares line through (log scale, log |residual|); returns (slope, intercept, r^2).

    Points with a zero residual are dropped; fewer than three usable points
    is an error.
    """
    pts = [(float(s), abs(float(r))) for s, r in points if r and s > 0]
    if len(pts) < 3:
        raise DegenerateInputError(f"need >= 3 points with nonzero residual, got {len(pts)}")
    X = np.log([s for s, _ in pts])
    Y = np.log([r for _, r in pts])
    slope, intercept = np.polyfit(X, Y, 1)
    pred = slope * X + intercept
    ss_res = float(np.sum((Y - pred) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
