"""Dirichlet characters, L-values, Dedekind zeta on the real line and main terms.

Everything runs in double precision.  Hurwitz zeta uses Euler-Maclaurin
summation with an adaptive cutoff; L(1, chi) goes through the digamma
function; L(0, chi) has an exact route through the generalized Bernoulli
number B_{1,chi}, returned as an element of a cyclotomic field.
"""

from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import PoleError
from .field import CYCLOTOMIC, QUADRATIC, NumberField, euler_phi, factorize, kronecker, split_prime

POLE_GUARD = 1e-6
EM_ORDER = 8
_EM_MAX_CUTOFF = 1 << 16


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B[n]


def _rising(s: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= s + i
    return out


@lru_cache(maxsize=1 << 14)
def hurwitz_zeta(s: float, a: float) -> float:
    """zeta(s, a) = sum_{n >= 0} (n + a)^-s, continued to all real s != 1.

    Euler-Maclaurin with ``EM_ORDER`` Bernoulli corrections; the cutoff is
    doubled until the first omitted correction is below 1e-16 of the result
    (or of the summed magnitudes when the result itself cancels).
    """
    s = float(s)
    a = float(a)
    if abs(s - 1.0) < POLE_GUARD:
        raise PoleError(f"hurwitz_zeta: s={s} is within {POLE_GUARD} of the pole")
    if not 0.0 < a <= 1.0:
        raise ValueError("hurwitz_zeta needs 0 < a <= 1")
    # small start for s < 1/2: the partial sum grows like cutoff^(1-s) and cancels
    cutoff = 2 if s < 0.5 else max(10, int(abs(s)) + 10)
    coeffs = [float(bernoulli(2 * k) / math.factorial(2 * k)) for k in range(1, EM_ORDER + 2)]
    while True:
        parts = [(n + a) ** -s for n in range(cutoff)]
        x = cutoff + a
        parts.append(x ** (1.0 - s) / (s - 1.0))
        parts.append(0.5 * x**-s)
        for k in range(1, EM_ORDER + 1):
            parts.append(coeffs[k - 1] * _rising(s, 2 * k - 1) * x ** (-s - 2 * k + 1))
        bound = 2.0 * abs(coeffs[EM_ORDER] * _rising(s, 2 * EM_ORDER + 1) * x ** (-s - 2 * EM_ORDER - 1))
        total = math.fsum(parts)
        scale = math.fsum(abs(t) for t in parts)
        if bound <= 1e-16 * abs(total) or bound <= 1e-18 * scale or cutoff >= _EM_MAX_CUTOFF:
            return total
        cutoff *= 2


def riemann_zeta(s: float) -> float:
    return hurwitz_zeta(s, 1.0)


def digamma(x: float) -> float:
    """psi(x) for x > 0: upward shift to x >= 8, then the asymptotic series."""
    if x <= 0:
        raise ValueError("digamma is only implemented for x > 0")
    shift = []
    while x < 8.0:
        shift.append(-1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = [math.log(x), -0.5 / x]
    p = 1.0
    for k in range(1, 11):
        p *= inv2
        series.append(-float(bernoulli(2 * k)) / (2 * k) * p)
    return math.fsum(series + shift)


# ---------------------------------------------------------------------------
# exact values in Q(zeta_n)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, constant term first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divexact(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _poly_divexact(num: list, den: list) -> list:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    return out


@dataclass(frozen=True)
class CyclotomicValue:
    """Element sum_k c_k zeta_n^k of Q(zeta_n), reduced modulo Phi_n."""

    n: int
    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_terms(cls, n: int, terms: dict[int, Fraction]) -> CyclotomicValue:
        poly = [Fraction(0)] * n
        for k, c in terms.items():
            poly[k % n] += c
        phi = cyclotomic_polynomial(n)
        deg = len(phi) - 1
        for i in range(n - 1, deg - 1, -1):
            c = poly[i]
            if c:
                for j, pj in enumerate(phi):
                    poly[i - deg + j] -= c * pj
        return cls(n, tuple(poly[:deg]))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def to_complex(self) -> complex:
        w = cmath.exp(2j * math.pi / self.n)
        return sum((float(c) * w**k for k, c in enumerate(self.coeffs)), 0j)

    def __complex__(self) -> complex:
        return self.to_complex()


# ---------------------------------------------------------------------------
# Dirichlet characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCharacter:
    """chi(a) = exp(2 pi i exps[a % modulus] / order); ``None`` marks chi(a) = 0."""

    modulus: int
    order: int
    exps: tuple[int | None, ...]
    label: tuple[int, ...] = ()

    def __call__(self, a: int) -> complex:
        k = self.exps[a % self.modulus]
        if k is None:
            return 0j
        if 2 * k == self.order:
            return -1 + 0j
        if k == 0:
            return 1 + 0j
        return cmath.exp(2j * math.pi * k / self.order)

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def parity(self) -> int:
        """+1 for even, -1 for odd."""
        if self.modulus <= 2:
            return 1
        return 1 if self.exps[self.modulus - 1] == 0 else -1

    def conjugate(self) -> DirichletCharacter:
        return DirichletCharacter(
            self.modulus, self.order, tuple(None if k is None else (-k) % self.order for k in self.exps), self.label
        )

    @property
    def conductor(self) -> int:
        m = self.modulus
        for d in sorted(d for d in range(1, m + 1) if m % d == 0):
            if all(self.exps[a] == 0 for a in range(1, m, d) if math.gcd(a, m) == 1):
                return d
        return m

    def primitive(self) -> DirichletCharacter:
        """The primitive character inducing this one."""
        d = self.conductor
        if d == self.modulus:
            return self
        exps: list[int | None] = [None] * d
        for b in range(d):
            if math.gcd(b, d) != 1:
                continue
            a = next(a for a in range(b, self.modulus, d) if math.gcd(a, self.modulus) == 1)
            exps[b] = self.exps[a]
        return _normalize(DirichletCharacter(d, self.order, tuple(exps), self.label))


def _normalize(chi: DirichletCharacter) -> DirichletCharacter:
    ks = [k for k in chi.exps if k is not None]
    g = chi.order
    for k in ks:
        g = math.gcd(g, k)
    if g <= 1:
        return chi
    return DirichletCharacter(
        chi.modulus, chi.order // g, tuple(None if k is None else k // g for k in chi.exps), chi.label
    )


def _component_logs(q: int, p: int, a: int):
    """Generators of (Z/p^a)^x with their orders and a discrete-log map."""
    units = [r for r in range(q) if r % p]
    if p == 2:
        if a == 1:
            return [], {1: ()}
        if a == 2:
            return [2], {1: (0,), 3: (1,)}
        gens_orders = [2, q // 4]
        logs = {}
        for i in range(2):
            for j in range(q // 4):
                r = pow(-1, i) * pow(5, j, q) % q
                logs[r] = (i, j)
        return gens_orders, logs
    phi = euler_phi(q)
    g = next(g for g in range(2, q) if g % p and all(pow(g, phi // r, q) != 1 for r in factorize(phi)))
    logs = {pow(g, j, q): (j,) for j in range(phi)}
    assert len(logs) == len(units)
    return [phi], logs


@lru_cache(maxsize=None)
def dirichlet_characters(m: int) -> tuple[DirichletCharacter, ...]:
    """All phi(m) characters mod m, principal first, ordered by generator exponents."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    comps = []
    for p, a in sorted(factorize(m).items()):
        q = p**a
        orders, logs = _component_logs(q, p, a)
        comps.append((q, orders, logs))
    orders = [o for _, os, _ in comps for o in os]
    lcm = 1
    for o in orders:
        lcm = lcm * o // math.gcd(lcm, o)
    # residue -> concatenated discrete logs
    res_logs: list[tuple[int, ...] | None] = []
    for r in range(m):
        if math.gcd(r, m) != 1:
            res_logs.append(None)
            continue
        logs = ()
        for q, _, table in comps:
            logs += table[r % q]
        res_logs.append(logs)
    out = []
    for label in itertools.product(*[range(o) for o in orders]):
        exps = []
        for logs in res_logs:
            if logs is None:
                exps.append(None)
            else:
                exps.append(sum(j * l * (lcm // o) for j, l, o in zip(label, logs, orders)) % lcm)
        out.append(_normalize(DirichletCharacter(m, lcm, tuple(exps), tuple(label))))
    return tuple(out)


@lru_cache(maxsize=None)
def kronecker_character(D: int) -> DirichletCharacter:
    """The real primitive character a -> (D/a) mod |D| of a fundamental discriminant."""
    m = abs(D)
    exps = []
    for a in range(m):
        if math.gcd(a, m) != 1:
            exps.append(None)
        else:
            exps.append(0 if kronecker(D, a) == 1 else 1)
    return DirichletCharacter(m, 2, tuple(exps), (D,))


def field_characters(K: NumberField) -> list[DirichletCharacter]:
    """Nonprincipal characters whose L-functions multiply zeta to zeta_K."""
    if K.kind == QUADRATIC:
        return [kronecker_character(K.discriminant)]
    if K.kind == CYCLOTOMIC:
        return list(dirichlet_characters(K.param)[1:])
    return []


# ---------------------------------------------------------------------------
# L-values
# ---------------------------------------------------------------------------


def dirichlet_L(s: float, chi: DirichletCharacter) -> complex:
    """L(s, chi) = m^-s sum_a chi(a) zeta(s, a/m)."""
    s = float(s)
    if chi.is_principal and s <= 1.0:
        raise PoleError("principal character: L(s) only evaluated for s > 1")
    if s == 1.0:
        return L_at_one(chi)
    m = chi.modulus
    re, im = [], []
    for a in range(1, m + 1):
        c = chi(a)
        if c == 0:
            continue
        h = hurwitz_zeta(s, a / m)
        re.append(c.real * h)
        im.append(c.imag * h)
    scale = m**-s
    return complex(scale * math.fsum(re), scale * math.fsum(im))


def L_at_one(chi: DirichletCharacter) -> complex:
    """L(1, chi) = -(1/m) sum_a chi(a) psi(a/m) for nonprincipal chi."""
    if chi.is_principal:
        raise PoleError("L(s, chi_0) has a pole at s = 1")
    m = chi.modulus
    re, im = [], []
    for a in range(1, m):
        c = chi(a)
        if c == 0:
            continue
        psi = digamma(a / m)
        re.append(c.real * psi)
        im.append(c.imag * psi)
    return complex(-math.fsum(re) / m, -math.fsum(im) / m)


def l_at_zero_via_bernoulli(chi: DirichletCharacter) -> CyclotomicValue:
    """L(0, chi) = -B_{1,chi} = -(1/m) sum_a chi(a) a, exactly, in Q(zeta_order)."""
    if chi.is_principal:
        raise ValueError("needs a nonprincipal character")
    m = chi.modulus
    terms: dict[int, Fraction] = {}
    for a in range(1, m + 1):
        k = chi.exps[a % m]
        if k is not None:
            terms[k] = terms.get(k, Fraction(0)) - Fraction(a, m)
    value = CyclotomicValue.from_terms(chi.order, terms)
    if chi.parity == 1:
        assert value.is_zero()
    return value


# ---------------------------------------------------------------------------
# Dedekind zeta
# ---------------------------------------------------------------------------


def _euler_correction(K: NumberField, s: float) -> float:
    """True local factors at p | conductor divided by those of zeta(s) prod L(s, chi mod m).

    Every nonprincipal chi mod the conductor vanishes at p, so the product's
    factor at p is just (1 - p^-s)^-1.
    """
    out = 1.0
    for p in factorize(K.conductor) if K.conductor > 1 else ():
        sig = split_prime(K, p)
        out *= (1.0 - p**-s) / (1.0 - p ** (-sig.f * s)) ** sig.g
    return out


def dedekind_zeta(K: NumberField, s: float) -> float:
    """zeta_K(s) for real s != 1 as zeta(s) times L-values, with local correction."""
    s = float(s)
    if abs(s - 1.0) < POLE_GUARD:
        raise PoleError(f"zeta_K has a pole at s = 1 (s={s})")
    if s == 0.0:
        return constants(K).zeta0
    value = complex(riemann_zeta(s))
    for chi in field_characters(K):
        value *= dirichlet_L(s, chi)
    value *= _euler_correction(K, s)
    assert abs(value.imag) <= 1e-9 * max(1.0, abs(value.real)), value
    return value.real


@dataclass(frozen=True)
class AnalyticConstants:
    field: str
    rho: float
    zeta0: float
    zeta2: float
    zeta0_exact: Fraction | None
    digits: int
    provenance: str

    def to_json(self) -> dict:
        zeta0 = self.zeta0
        if self.zeta0_exact is not None and self.zeta0_exact == 0:
            zeta0 = 0
        out = {
            "field": self.field,
            "rho": self.rho,
            "zeta0": zeta0,
            "zeta2": self.zeta2,
            "digits": self.digits,
            "provenance": self.provenance,
        }
        if self.zeta0_exact is not None:
            out["zeta0_exact"] = str(self.zeta0_exact)
        return out


def _zeta_at_zero(K: NumberField) -> tuple[float, Fraction | None]:
    # primitive characters: the imprimitive Euler correction is singular at s = 0
    values = [l_at_zero_via_bernoulli(chi.primitive()) for chi in field_characters(K)]
    if any(v.is_zero() for v in values):
        return 0.0, Fraction(0)
    if all(v.is_rational() for v in values):
        exact = Fraction(-1, 2)
        for v in values:
            exact *= v.as_fraction()
        return float(exact), exact
    prod = complex(-0.5)
    for v in values:
        prod *= v.to_complex()
    return prod.real, None


@lru_cache(maxsize=None)
def constants(K: NumberField) -> AnalyticConstants:
    """rho_K (residue at s = 1), zeta_K(0) and zeta_K(2)."""
    chars = field_characters(K)
    rho = complex(1.0)
    for chi in chars:
        rho *= L_at_one(chi)
    rho_val = rho.real * _euler_correction(K, 1.0)
    zeta0, exact0 = _zeta_at_zero(K)
    zeta2 = dedekind_zeta(K, 2.0)
    if K.kind == QUADRATIC:
        src = f"Kronecker character mod {abs(K.discriminant)}"
    elif K.kind == CYCLOTOMIC:
        src = f"{len(chars)} nonprincipal characters mod {K.param} + Euler correction at p | {K.param}"
    else:
        src = "Riemann zeta"
    provenance = (
        f"rho: prod L(1,chi) via digamma; zeta0: -1/2 * prod(-B_1,chi*) exact; "
        f"zeta2: Euler-Maclaurin Hurwitz zeta; characters: {src}"
    )
    return AnalyticConstants(str(K), rho_val, zeta0, zeta2, exact0, 15, provenance)


# ---------------------------------------------------------------------------
# main terms
# ---------------------------------------------------------------------------


def main_term_first(K: NumberField, x: float, y: float) -> float:
    """rho_K * y."""
    return constants(K).rho * y


def crossover_regime(x: float, y: float) -> str:
    return "below" if y < x**2.5 else "above"


def main_term_second(
    K: NumberField, x: float, y: float, regime: str | None = None, c2_convention: float = 0.5
) -> float:
    """c2 rho^2/zeta_K(2) y x^2, plus rho^2 zeta_K(0)/(4 zeta_K(2)^2) x^4 below y = x^{5/2}."""
    if c2_convention not in (1, 0.5):
        raise ValueError("c2_convention must be 1 or 0.5")
    natural = crossover_regime(x, y)
    if regime is None:
        regime = natural
    elif regime not in ("below", "above"):
        raise ValueError(f"unknown regime {regime!r}")
    elif regime != natural:
        warnings.warn(f"regime {regime!r} requested but y={y} is {natural} x^(5/2) for x={x}", stacklevel=2)
    c = constants(K)
    value = c2_convention * c.rho**2 / c.zeta2 * y * x * x
    if regime == "below":
        value += x4_term(K, x)
    return value


def x4_term(K: NumberField, x: float) -> float:
    c = constants(K)
    if c.zeta0_exact == 0:
        return 0.0
    return c.rho**2 * c.zeta0 / (4.0 * c.zeta2**2) * x**4


def lemma31_main(K: NumberField, x: float, z: float) -> float:
    """rho zeta_K(1-z) x + rho zeta_K(1+z) x^(1+z)/(1+z), for real z in (-1/2, 0)."""
    if z == 0:
        raise PoleError("z = 0 puts both terms on the pole of zeta_K")
    if not -0.5 < z < 0:
        raise ValueError("lemma31_main needs z in (-1/2, 0)")
    rho = constants(K).rho
    return rho * dedekind_zeta(K, 1 - z) * x + rho * dedekind_zeta(K, 1 + z) * x ** (1 + z) / (1 + z)


def r0_main(K: NumberField, x: float, z1: float, z2: float) -> float:
    """Sum of the residues at s = 1, 1+z1, 1+z2, 1+z1+z2 of the sigma-pair series."""
    if z1 == z2:
        raise PoleError("z1 = z2 makes zeta_K(1) appear")
    if not (-0.5 < z1 < 0 and -0.5 < z2 < 0 and z1 + z2 >= -0.5):
        raise ValueError("r0_main needs z1, z2 in (-1/2, 0) with z1 + z2 >= -1/2")
    for arg in (1 + z1 - z2, 1 + z2 - z1):
        if abs(arg - 1) < POLE_GUARD:
            raise PoleError(f"argument {arg} within {POLE_GUARD} of the pole")
    Z = lambda s: dedekind_zeta(K, s)  # noqa: E731
    rho = constants(K).rho
    t0 = Z(1 - z1) * Z(1 - z2) * Z(1 - z1 - z2) / Z(2 - z1 - z2) * x
    t1 = Z(1 + z1) * Z(1 + z1 - z2) * Z(1 - z2) / Z(2 + z1 - z2) * x ** (1 + z1) / (1 + z1)
    t2 = Z(1 + z2) * Z(1 + z2 - z1) * Z(1 - z1) / Z(2 - z1 + z2) * x ** (1 + z2) / (1 + z2)
    t3 = Z(1 + z1 + z2) * Z(1 + z2) * Z(1 + z1) / Z(2 + z1 + z2) * x ** (1 + z1 + z2) / (1 + z1 + z2)
    return rho * (t0 + t1 + t2 + t3)
