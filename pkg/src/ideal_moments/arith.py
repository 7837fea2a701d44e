"""Arithmetic functions on ideals and exact checks of their Dirichlet series.

Functions here: the ideal Moebius function, sigma_{K,z}(I) = sum_{D | I} N(D)^z,
and the Ramanujan sum C_J(I) = sum_{D | gcd(I, J)} N(D) mu(J / D).  Tables of
norm-aggregates are built with the multiplicative sieve in ``ideals``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import FieldMismatchError
from .field import NumberField, factorize, split_prime
from .ideals import (
    DEFAULT_MAX_TABLE_N,
    CoefficientTable,
    Ideal,
    enumerate_ideals,
    ideal_count_table,
    ideal_div,
    ideal_divisors,
    ideal_gcd,
    multiplicative_table,
    prime_ideals_above,
)


@dataclass(frozen=True)
class ZParam:
    """Exponent z of sigma_{K,z}.

    Nonnegative integers keep every result an exact integer; negative
    integers give exact Fractions; anything else is evaluated in floating
    point (real or complex).
    """

    value: complex

    @classmethod
    def of(cls, z) -> ZParam:
        if isinstance(z, ZParam):
            return z
        if isinstance(z, Fraction) and z.denominator == 1:
            z = int(z)
        return cls(z)

    @property
    def is_integer(self) -> bool:
        v = self.value
        if isinstance(v, int):
            return True
        v = complex(v)
        return v.imag == 0 and float(v.real).is_integer()

    @property
    def exact(self) -> bool:
        return self.is_integer and int(complex(self.value).real) >= 0

    @property
    def is_real(self) -> bool:
        return complex(self.value).imag == 0

    @property
    def kind(self) -> str:
        if self.exact:
            return "int"
        if self.is_integer:
            return "object"
        return "float" if self.is_real else "complex"

    def power(self, q: int):
        """q**z in the arithmetic matching ``kind``."""
        if self.is_integer:
            k = int(complex(self.value).real)
            return q**k if k >= 0 else Fraction(1, q**-k)
        if self.is_real:
            return float(q) ** float(complex(self.value).real)
        return cmath.exp(complex(self.value) * math.log(q))

    def __str__(self) -> str:
        if self.is_integer:
            return str(int(complex(self.value).real))
        if self.is_real:
            return repr(float(complex(self.value).real))
        return repr(complex(self.value))


def moebius(I: Ideal) -> int:
    if any(k > 1 for _, k in I.factors):
        return 0
    return -1 if len(I.factors) % 2 else 1


def _sigma_local(w, v: int):
    # 1 + w + ... + w^v
    total = w * 0 + 1
    term = total
    for _ in range(v):
        term = term * w
        total = total + term
    return total


def sigma_z(I: Ideal, z) -> Number:
    """sigma_{K,z}(I) as a product of local factors over the prime ideals of I."""
    zp = ZParam.of(z)
    out = 1
    for P, v in I.factors:
        out = out * _sigma_local(zp.power(P.norm), v)
    return out


def ramanujan_sum_divisor(J: Ideal, I: Ideal) -> int:
    """C_J(I) straight from its defining divisor sum."""
    if I.field != J.field:
        raise FieldMismatchError(f"ideals from {J.field} and {I.field}")
    return sum(D.norm * moebius(ideal_div(J, D)) for D in ideal_divisors(ideal_gcd(I, J)))


def ramanujan_sum_local(J: Ideal, I: Ideal) -> int:
    """C_J(I) as a product of per-prime factors (default path)."""
    if I.field != J.field:
        raise FieldMismatchError(f"ideals from {J.field} and {I.field}")
    vi = dict(I.factors)
    out = 1
    for P, k in J.factors:
        q = P.norm
        v = vi.get(P, 0)
        if v >= k:
            out *= q ** (k - 1) * (q - 1)
        elif v == k - 1:
            out *= -(q ** (k - 1))
        else:
            return 0
    return out


def ramanujan_sum(J: Ideal, I: Ideal, method: str = "local") -> int:
    if method == "local":
        return ramanujan_sum_local(J, I)
    if method == "divisor":
        return ramanujan_sum_divisor(J, I)
    raise ValueError(f"unknown method {method!r}")


def classical_moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def classical_ramanujan_sum(q: int, n: int) -> int:
    """c_q(n) = sum_{d | (q, n)} d mu(q/d)."""
    g = math.gcd(q, n)
    return sum(d * classical_moebius(q // d) for d in range(1, g + 1) if g % d == 0)


def classical_ramanujan_sum_trig(q: int, n: int) -> int:
    """c_q(n) as the sum of e(nj/q) over reduced residues j mod q."""
    s = math.fsum(math.cos(2 * math.pi * n * j / q) for j in range(1, q + 1) if math.gcd(j, q) == 1)
    return round(s)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def _mu_series(q, jmax):
    return ([1, -1] + [0] * jmax)[: jmax + 1]


def moebius_table(K: NumberField, X: int, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """sum_{N(J)=n} mu(J)."""
    return multiplicative_table(K, X, _mu_series, "int", tag="mu", max_n=max_n)


def mertens_table(K: NumberField, X: int, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """M_K(t) = sum_{0 < N(J) <= t} mu(J) for t <= X."""
    return moebius_table(K, X, max_n).cumulative(tag="mertens")


def _sigma_series(zp: ZParam):
    def series(q, jmax):
        w = zp.power(q)
        return [_sigma_local(w, j) for j in range(jmax + 1)]

    return series


def divisor_coeff_table(K: NumberField, N: int, z, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """A(n, z) = sum_{N(I)=n} sigma_{K,z}(I)."""
    zp = ZParam.of(z)
    return multiplicative_table(K, N, _sigma_series(zp), zp.kind, tag=f"A(z={zp})", max_n=max_n)


def _pair_kind(a: ZParam, b: ZParam) -> str:
    order = ["int", "object", "float", "complex"]
    ka, kb = a.kind, b.kind
    if "object" in (ka, kb) and "float" in (ka, kb):
        return "float"
    return max(ka, kb, key=order.index)


def pair_coeff_table(K: NumberField, N: int, z1, z2, max_n: int = DEFAULT_MAX_TABLE_N) -> CoefficientTable:
    """A(n, z1, z2) = sum_{N(I)=n} sigma_{K,z1}(I) sigma_{K,z2}(I)."""
    a, b = ZParam.of(z1), ZParam.of(z2)
    kind = _pair_kind(a, b)
    s1, s2 = _sigma_series(a), _sigma_series(b)

    def series(q, jmax):
        return [u * v for u, v in zip(s1(q, jmax), s2(q, jmax))]

    return multiplicative_table(K, N, series, kind, tag=f"A(z1={a},z2={b})", max_n=max_n)


# ---------------------------------------------------------------------------
# Dirichlet-series identities, coefficient by coefficient
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    name: str
    ok: bool
    checked: int
    first_failure: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tail = f" first failing n={self.first_failure}" if self.first_failure is not None else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: {self.checked} coefficients{tail}{extra}"


def dirichlet_convolve(f, g, N: int) -> list:
    """(f * g)(n) for n = 0..N (index 0 unused)."""
    out = [0] * (N + 1)
    for d in range(1, N + 1):
        fd = f[d]
        if not fd:
            continue
        for m in range(1, N // d + 1):
            out[d * m] += fd * g[m]
    return out


def verify_lemma21(
    K: NumberField,
    I: Ideal,
    N: int,
    *,
    ideals: list[Ideal] | None = None,
    counts: CoefficientTable | None = None,
) -> VerifyReport:
    """zeta_K(s) * sum_J C_J(I) N(J)^-s == sum_{D | I} N(D)^{1-s}, coefficientwise up to N.

    ``ideals`` (all ideals of norm <= N) and ``counts`` (a_K up to N) may be
    passed in to share work between calls.
    """
    name = f"lemma21[{K}, I={I!r}, N={N}]"
    if ideals is None:
        ideals = enumerate_ideals(K, N)
    if counts is None:
        counts = ideal_count_table(K, N)
    b = [0] * (N + 1)
    for J in ideals:
        if J.norm > N:
            break
        b[J.norm] += ramanujan_sum_local(J, I)
    a = [int(v) for v in counts.values[: N + 1]]
    lhs = dirichlet_convolve(a, b, N)
    rhs = [0] * (N + 1)
    for D in ideal_divisors(I):
        if D.norm <= N:
            rhs[D.norm] += D.norm
    for n in range(1, N + 1):
        if lhs[n] != rhs[n]:
            return VerifyReport(name, False, n, n, f"lhs={lhs[n]} rhs={rhs[n]}")
    return VerifyReport(name, True, N)


def verify_lemma22(
    K: NumberField,
    N: int,
    z: int,
    *,
    counts: CoefficientTable | None = None,
    table: CoefficientTable | None = None,
) -> VerifyReport:
    """A(n, z) == [n^-s] zeta_K(s) zeta_K(s - z) for n <= N (exact, integer z >= 0)."""
    name = f"lemma22[{K}, z={z}, N={N}]"
    if not (isinstance(z, (int, np.integer)) and z >= 0):
        raise ValueError("exact verification needs an integer z >= 0")
    z = int(z)
    if counts is None:
        counts = ideal_count_table(K, N)
    if table is None:
        table = divisor_coeff_table(K, N, z)
    a = [int(v) for v in counts.values[: N + 1]]
    shifted = [a[d] * d**z for d in range(N + 1)]
    rhs = dirichlet_convolve(a, shifted, N)
    for n in range(1, N + 1):
        if int(table.values[n]) != rhs[n]:
            return VerifyReport(name, False, n, n, f"A={table.values[n]} conv={rhs[n]}")
    return VerifyReport(name, True, N)


def _series_mul(a: list, b: list, kmax: int) -> list:
    out = [a[0] * 0] * (kmax + 1)
    for i, x in enumerate(a[: kmax + 1]):
        if x:
            for j in range(kmax + 1 - i):
                out[i + j] += x * b[j]
    return out


def _geometric(w, kmax: int) -> list:
    # 1 / (1 - w u)
    out = [w * 0 + 1]
    for _ in range(kmax):
        out.append(out[-1] * w)
    return out


def lemma23_local_factor(q: int, g: int, kmax: int, z1=0, z2=0) -> list:
    """Coefficients of u^k (u = N(P)^-s) in the local factor at p of
    zeta_K(s) zeta_K(s-z1) zeta_K(s-z2) zeta_K(s-z1-z2) / zeta_K(2s-z1-z2)."""
    a, b = ZParam.of(z1), ZParam.of(z2)
    w1, w2 = a.power(q), b.power(q)
    w12 = w1 * w2
    one = w12 * 0 + 1
    series = [one] + [one * 0] * kmax
    for w in (one, w1, w2, w12):
        geo = _geometric(w, kmax)
        for _ in range(g):
            series = _series_mul(series, geo, kmax)
    # numerator (1 - w12 u^2)^g
    num = [one] + [one * 0] * kmax
    for _ in range(g):
        factor = [one] + [one * 0] * kmax
        if kmax >= 2:
            factor[2] = -w12
        num = _series_mul(num, factor, kmax)
    return _series_mul(series, num, kmax)


def verify_lemma23_local(K: NumberField, p: int, k_max: int, z1=0, z2=0, rel_tol: float = 1e-9) -> VerifyReport:
    """Compare local Euler factors of sum sigma_z1 sigma_z2 N^-s at the primes above p.

    The left side enumerates the ideals supported above p of norm N(P)^k and
    evaluates sigma_{z1} sigma_{z2} on each; the right side expands the
    zeta-quotient's local factor.  Exact when z1, z2 are integers >= 0.
    """
    name = f"lemma23[{K}, p={p}, k<={k_max}, z=({z1},{z2})]"
    sig = split_prime(K, p)
    q = sig.p**sig.f
    above = prime_ideals_above(K, p)
    rhs = lemma23_local_factor(q, sig.g, k_max, z1, z2)
    exact = ZParam.of(z1).exact and ZParam.of(z2).exact
    for k in range(k_max + 1):
        lhs = 0
        for exps in itertools.product(range(k + 1), repeat=sig.g):
            if sum(exps) != k:
                continue
            I = Ideal.from_factors(K, list(zip(above, exps)))
            lhs += sigma_z(I, z1) * sigma_z(I, z2)
        if exact:
            good = lhs == rhs[k]
        else:
            good = abs(lhs - rhs[k]) <= rel_tol * max(abs(lhs), abs(rhs[k]), 1.0)
        if not good:
            return VerifyReport(name, False, k + 1, k, f"lhs={lhs} rhs={rhs[k]}")
    return VerifyReport(name, True, k_max + 1, detail=f"g={sig.g} N(P)={q}")
