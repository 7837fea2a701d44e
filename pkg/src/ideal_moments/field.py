"""Supported number fields and the decomposition of rational primes in them.

Three families are handled: the rationals, quadratic fields keyed by a
squarefree integer d, and cyclotomic fields Q(zeta_m) with m >= 3 and
m not congruent to 2 mod 4.  Descriptor strings are ``"Q"``,
``"Q(sqrt{d})"`` and ``"Q(zeta{m})"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError

RATIONAL = "rational"
QUADRATIC = "quadratic"
CYCLOTOMIC = "cyclotomic"

# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic strong-pseudoprime test, exact on the 64-bit range."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes; returns an int64 array of primes <= n."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization (small n only)."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(abs(n)).values())


def multiplicative_order(a: int, m: int) -> int:
    if m == 1:
        return 1
    if math.gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    k, x = 1, a % m
    while x != 1:
        x = x * a % m
        k += 1
    return k


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs a positive odd modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n < 1:
        raise ValueError("kronecker() only supports positive n")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(a, n)


@dataclass(frozen=True)
class SplittingSignature:
    """How a rational prime decomposes: p O_K = (P_1 ... P_g)^e, N(P_i) = p^f."""

    p: int
    e: int
    f: int
    g: int

    @property
    def parts(self) -> list[tuple[int, int, int]]:
        return [(self.e, self.f, self.g)]

    @property
    def residue_norm(self) -> int:
        return self.p**self.f


_DESCRIPTOR = re.compile(r"^Q(?:\(sqrt\{(-?\d+)\}\)|\(zeta\{(\d+)\}\))?$")


@dataclass(frozen=True)
class NumberField:
    """Descriptor of Q, a quadratic field or a cyclotomic field.

    ``param`` is d for quadratic fields and the modulus m for cyclotomic
    ones; it is 1 for Q.  Use the classmethod constructors, which validate.
    """

    kind: str
    param: int = 1

    def __post_init__(self):
        if self.kind == RATIONAL:
            if self.param != 1:
                raise ConfigError("Q takes no parameter")
        elif self.kind == QUADRATIC:
            d = self.param
            if d in (0, 1) or not is_squarefree(d):
                raise ConfigError(f"quadratic field needs squarefree d != 0, 1; got {d}")
        elif self.kind == CYCLOTOMIC:
            m = self.param
            if m < 3 or m % 4 == 2:
                raise ConfigError(f"cyclotomic modulus must be >= 3 and != 2 mod 4; got {m}")
        else:
            raise ConfigError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rational(cls) -> NumberField:
        return cls(RATIONAL)

    @classmethod
    def quadratic(cls, d: int) -> NumberField:
        return cls(QUADRATIC, d)

    @classmethod
    def cyclotomic(cls, m: int) -> NumberField:
        return cls(CYCLOTOMIC, m)

    @classmethod
    def parse(cls, text: str) -> NumberField:
        match = _DESCRIPTOR.fullmatch(text)
        if not match:
            raise ConfigError(f"unrecognised field descriptor {text!r}")
        d, m = match.groups()
        if d is not None:
            return cls.quadratic(int(d))
        if m is not None:
            return cls.cyclotomic(int(m))
        return cls.rational()

    def __str__(self) -> str:
        if self.kind == QUADRATIC:
            return f"Q(sqrt{{{self.param}}})"
        if self.kind == CYCLOTOMIC:
            return f"Q(zeta{{{self.param}}})"
        return "Q"

    @property
    def descriptor(self) -> str:
        return str(self)

    @property
    def degree(self) -> int:
        if self.kind == QUADRATIC:
            return 2
        if self.kind == CYCLOTOMIC:
            return euler_phi(self.param)
        return 1

    @property
    def discriminant(self) -> int:
        """Fundamental discriminant of a quadratic field."""
        if self.kind != QUADRATIC:
            raise ValueError("fundamental discriminant is only defined here for quadratic fields")
        d = self.param
        return d if d % 4 == 1 else 4 * d

    @property
    def conductor(self) -> int:
        """Modulus of the Dirichlet characters whose L-functions build zeta_K."""
        if self.kind == QUADRATIC:
            return abs(self.discriminant)
        if self.kind == CYCLOTOMIC:
            return self.param
        return 1


def degree(K: NumberField) -> int:
    return K.degree


def ramified_primes(K: NumberField) -> frozenset[int]:
    if K.kind == RATIONAL:
        return frozenset()
    return frozenset(factorize(K.conductor))


@lru_cache(maxsize=1 << 16)
def split_prime(K: NumberField, p: int) -> SplittingSignature:
    """Splitting signature (e, f, g) of the rational prime p in K."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if K.kind == RATIONAL:
        return SplittingSignature(p, 1, 1, 1)
    if K.kind == QUADRATIC:
        D = K.discriminant
        if D % p == 0:
            return SplittingSignature(p, 2, 1, 1)
        if kronecker(D, p) == 1:
            return SplittingSignature(p, 1, 1, 2)
        return SplittingSignature(p, 1, 2, 1)
    m = K.param
    a, rest = 0, m
    while rest % p == 0:
        rest //= p
        a += 1
    e = euler_phi(p**a) if a else 1
    f = multiplicative_order(p, rest)
    return SplittingSignature(p, e, f, euler_phi(rest) // f)


REFERENCE_FIELDS = ("Q", "Q(sqrt{-1})", "Q(sqrt{5})", "Q(zeta{5})")


def reference_fields() -> list[NumberField]:
    """The four fields used throughout the test and acceptance suites."""
    return [NumberField.parse(s) for s in REFERENCE_FIELDS]
