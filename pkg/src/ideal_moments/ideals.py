"""Integral ideals as finitely supported exponent maps on prime ideals.

Ideals never carry generators; everything downstream depends only on the
factorization and on norms.  Conjugate prime ideals above a split prime are
told apart by a stable index ``0 .. g-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import FieldMismatchError, ResourceLimitError
from .field import NumberField, primes_up_to, split_prime

DEFAULT_MAX_TABLE_N = 10**7
DEFAULT_MAX_IDEALS = 2 * 10**7

_INT_SAFE = float(2**62)


@dataclass(frozen=True, order=True)
class PrimeIdeal:
    p: int
    index: int
    e: int = dc_field(compare=False)
    f: int = dc_field(compare=False)

    @property
    def norm(self) -> int:
        return self.p**self.f

    def __repr__(self) -> str:
        return f"P({self.p},{self.index})"


def prime_ideals_above(K: NumberField, p: int) -> list[PrimeIdeal]:
    sig = split_prime(K, p)
    return [PrimeIdeal(p, i, sig.e, sig.f) for i in range(sig.g)]


def prime_ideal(K: NumberField, p: int, index: int = 0) -> PrimeIdeal:
    above = prime_ideals_above(K, p)
    if not 0 <= index < len(above):
        raise ValueError(f"only {len(above)} prime ideal(s) above {p} in {K}")
    return above[index]


@dataclass(frozen=True)
class Ideal:
    """Nonzero integral ideal of O_K given by its prime factorization.

    ``factors`` is a tuple of ``(PrimeIdeal, exponent)`` pairs, strictly sorted
    with positive exponents.  The empty tuple is O_K itself.
    """

    field: NumberField
    factors: tuple[tuple[PrimeIdeal, int], ...] = ()
    norm: int = 1

    @classmethod
    def from_factors(cls, K: NumberField, factors: dict | Iterable[tuple[PrimeIdeal, int]]) -> Ideal:
        items = factors.items() if isinstance(factors, dict) else factors
        merged: dict[PrimeIdeal, int] = {}
        for P, k in items:
            if k < 0:
                raise ValueError("negative exponent")
            merged[P] = merged.get(P, 0) + k
        canon = tuple(sorted((P, k) for P, k in merged.items() if k))
        norm = 1
        for P, k in canon:
            norm *= P.norm**k
        return cls(K, canon, norm)

    @classmethod
    def unit(cls, K: NumberField) -> Ideal:
        return cls(K)

    @classmethod
    def of_prime(cls, P: PrimeIdeal, K: NumberField, k: int = 1) -> Ideal:
        return cls.from_factors(K, [(P, k)])

    def as_dict(self) -> dict[PrimeIdeal, int]:
        return dict(self.factors)

    @property
    def is_unit(self) -> bool:
        return not self.factors

    def sort_key(self):
        return (self.norm, tuple((P.p, P.index, k) for P, k in self.factors))

    def __mul__(self, other: Ideal) -> Ideal:
        return ideal_mul(self, other)

    def __repr__(self) -> str:
        if not self.factors:
            return "O_K"
        body = "*".join(f"{P!r}^{k}" if k > 1 else repr(P) for P, k in self.factors)
        return f"<{body} N={self.norm}>"


def _check_same(I: Ideal, J: Ideal) -> None:
    if I.field != J.field:
        raise FieldMismatchError(f"ideals from {I.field} and {J.field}")


def ideal_mul(I: Ideal, J: Ideal) -> Ideal:
    _check_same(I, J)
    return Ideal.from_factors(I.field, list(I.factors) + list(J.factors))


def ideal_gcd(I: Ideal, J: Ideal) -> Ideal:
    _check_same(I, J)
    b = J.as_dict()
    return Ideal.from_factors(I.field, [(P, min(k, b[P])) for P, k in I.factors if P in b])


def valuation(I: Ideal, P: PrimeIdeal) -> int:
    return I.as_dict().get(P, 0)


def ideal_divides(D: Ideal, I: Ideal) -> bool:
    _check_same(D, I)
    a = I.as_dict()
    return all(a.get(P, 0) >= k for P, k in D.factors)


def ideal_div(I: Ideal, D: Ideal) -> Ideal:
    """Exact quotient I / D; D must divide I."""
    if not ideal_divides(D, I):
        raise ValueError(f"{D!r} does not divide {I!r}")
    a = I.as_dict()
    for P, k in D.factors:
        a[P] -= k
    return Ideal.from_factors(I.field, a)


def ideal_divisors(I: Ideal) -> list[Ideal]:
    """All divisors of I, unit ideal first, I last (count = prod(exponent + 1))."""
    out: list[list[tuple[PrimeIdeal, int]]] = [[]]
    for P, k in I.factors:
        out = [d + [(P, j)] if j else d for d in out for j in range(k + 1)]
    divisors = [Ideal.from_factors(I.field, d) for d in out]
    divisors.sort(key=Ideal.sort_key)
    return divisors


def prime_ideals_up_to(K: NumberField, X: int) -> list[PrimeIdeal]:
    """Prime ideals of norm <= X, ordered by (norm, p, index)."""
    out = []
    for p in primes_up_to(X).tolist():
        sig = split_prime(K, p)
        if p**sig.f <= X:
            out.extend(PrimeIdeal(p, i, sig.e, sig.f) for i in range(sig.g))
    out.sort(key=lambda P: (P.norm, P.p, P.index))
    return out


def _predicted_ideal_count(K: NumberField, X: int) -> float:
    from .analytic import constants

    return constants(K).rho * X


def iter_factorizations(primes: Sequence[int], X: int):
    """Yield ``(norm, exponents)`` for every product of the given norms <= X.

    ``primes`` are the norms of distinct prime ideals; ``exponents`` is a
    tuple of ``(position, exponent)`` pairs in increasing position order.
    """
    stack = [(0, 1, ())]
    while stack:
        start, norm, exps = stack.pop()
        yield norm, exps
        for i in range(start, len(primes)):
            q = primes[i]
            nq = norm * q
            if nq > X:
                break
            k = 1
            while nq <= X:
                stack.append((i + 1, nq, exps + ((i, k),)))
                nq *= q
                k += 1


def enumerate_ideals(K: NumberField, X: int, max_ideals: int = DEFAULT_MAX_IDEALS) -> list[Ideal]:
    """Every ideal of norm <= X exactly once, sorted by (norm, factorization)."""
    if X < 1:
        raise ValueError("norm bound must be >= 1")
    if _predicted_ideal_count(K, X) > max_ideals:
        raise ResourceLimitError(f"enumerating ideals of {K} up to {X} exceeds cap {max_ideals}")
    primes = prime_ideals_up_to(K, X)
    norms = [P.norm for P in primes]
    out = [
        Ideal(K, tuple(sorted((primes[i], k) for i, k in exps)), n)
        for n, exps in iter_factorizations(norms, X)
    ]
    out.sort(key=Ideal.sort_key)
    return out


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------


@dataclass
class CoefficientTable:
    """Values indexed by norm n = 1..N (``values[0]`` is unused and 0)."""

    field: NumberField
    tag: str
    N: int
    values: np.ndarray

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self) -> int:
        return self.N

    @property
    def exact(self) -> bool:
        return self.values.dtype.kind in "iO"

    def partial_sum(self, t: int):
        """sum_{n <= t} values[n]; exact for integer tables, fsum otherwise."""
        t = min(int(t), self.N)
        if t < 1:
            return 0
        chunk = self.values[1 : t + 1]
        if chunk.dtype == object:
            return sum(chunk.tolist())
        if chunk.dtype.kind == "i":
            bound = float(np.abs(chunk).max()) * t
            if bound < _INT_SAFE:
                return int(chunk.sum())
            return sum(int(v) for v in chunk.tolist())
        if chunk.dtype.kind == "c":
            return complex(math.fsum(chunk.real), math.fsum(chunk.imag))
        return math.fsum(chunk.tolist())

    def cumulative(self, tag: str | None = None) -> CoefficientTable:
        vals = self.values
        if vals.dtype.kind == "i":
            bound = float(np.abs(vals).max()) * max(self.N, 1)
            if bound >= _INT_SAFE:
                vals = vals.astype(object)
        out = np.cumsum(vals)
        return CoefficientTable(self.field, tag or f"cum({self.tag})", self.N, out)


PrimeIdealSeries = Callable[[int, int], Sequence]
"""``series(norm, jmax)`` -> values h[0..jmax] of a function on powers P^j
of a single prime ideal of the given norm; h[0] must be 1."""


def _poly_pow_trunc(h: Sequence, g: int, jmax: int) -> list:
    out = [h[0] * 0 + 1] + [h[0] * 0] * jmax
    for _ in range(g):
        nxt = [h[0] * 0] * (jmax + 1)
        for i, a in enumerate(out):
            if not a:
                continue
            for j in range(jmax + 1 - i):
                nxt[i + j] += a * h[j]
        out = nxt
    return out


def local_coefficients(K: NumberField, p: int, kmax: int, series: PrimeIdealSeries) -> list:
    """Aggregate of a multiplicative ideal function over ideals of norm p^k, k <= kmax.

    The prime ideals above p share one residue degree f, so only k divisible
    by f contribute, with value [T^(k/f)] (sum_j h(j) T^j)^g.
    """
    sig = split_prime(K, p)
    jmax = kmax // sig.f
    h = list(series(p**sig.f, jmax))
    loc = _poly_pow_trunc(h, sig.g, jmax)
    zero = loc[0] * 0
    out = [zero] * (kmax + 1)
    for j, v in enumerate(loc):
        out[j * sig.f] = v
    return out


def _kind_dtype(kind: str):
    return {"int": np.int64, "object": object, "float": np.float64, "complex": np.complex128}[kind]


def multiplicative_table(
    K: NumberField,
    N: int,
    series: PrimeIdealSeries,
    kind: str = "int",
    tag: str = "",
    max_n: int = DEFAULT_MAX_TABLE_N,
) -> CoefficientTable:
    """Sieve the norm-aggregate sum_{N(I)=n} F(I) of a multiplicative F, n <= N.

    ``kind`` selects the storage: ``int`` (int64, automatically widened to
    Python integers if any value could overflow), ``object`` (exact
    Fractions / big ints), ``float`` or ``complex``.
    """
    if N < 1:
        raise ValueError("table bound must be >= 1")
    if N > max_n:
        raise ResourceLimitError(f"table size {N} exceeds cap {max_n}")
    if kind == "int":
        vals, shadow = _sieve(K, N, series, np.int64, track=True)
        if shadow >= _INT_SAFE:
            vals, _ = _sieve(K, N, series, object)
    else:
        vals, _ = _sieve(K, N, series, _kind_dtype(kind))
    return CoefficientTable(K, tag, N, vals)


def _sieve(K, N, series, dtype, track=False):
    vals = np.ones(N + 1, dtype=dtype)
    vals[0] = 0
    mags = np.ones(N + 1, dtype=np.float64) if track else None
    root = math.isqrt(N)
    for p in primes_up_to(N).tolist():
        if p > root:
            sig = split_prime(K, p)
            c = sig.g * series(p, 1)[1] if sig.f == 1 else 0
            if track and abs(float(c)) >= _INT_SAFE:
                return vals, math.inf
            if c != 1:
                vals[p::p] *= c
                if track:
                    mags[p::p] *= abs(float(c))
            continue
        kmax = 1
        while p ** (kmax + 1) <= N:
            kmax += 1
        coeffs = local_coefficients(K, p, kmax, series)
        exps = np.ones((N // p), dtype=np.intp)
        step = 1
        for _ in range(2, kmax + 1):
            step *= p
            exps[step - 1 :: step] += 1
        if track and max(abs(float(c)) for c in coeffs) >= _INT_SAFE:
            return vals, math.inf
        carr = np.array(coeffs, dtype=dtype)
        vals[p::p] *= carr[exps]
        if track:
            mags[p::p] *= np.abs(np.array([float(c) for c in coeffs]))[exps]
    shadow = float(mags.max()) if track else 0.0
    return vals, shadow


def _ones(q, jmax):
    return [1] * (jmax + 1)


def ideal_count_table(K: NumberField, N: int, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """a_K(n) = number of ideals of norm exactly n, for n <= N."""
    table = multiplicative_table(K, N, _ones, "int", tag="a_K", max_n=max_n)
    if table.values.dtype == object:
        raise OverflowError("ideal counts exceed the int64 range")
    return table


def rough_count_table(K: NumberField, x: int, N: int, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """Number of ideals of norm n all of whose prime factors have norm > x."""

    def series(q, jmax):
        return [1] + [0 if q <= x else 1] * jmax

    return multiplicative_table(K, N, series, "int", tag=f"rough(x={x})", max_n=max_n)
