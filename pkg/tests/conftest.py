import math
import os

import pytest
from hypothesis import HealthCheck, settings

from ideal_moments.field import NumberField

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

REFERENCE = ["Q", "Q(sqrt{-1})", "Q(sqrt{5})", "Q(zeta{5})"]


@pytest.fixture(params=REFERENCE)
def ref_field(request):
    return NumberField.parse(request.param)


@pytest.fixture
def QQ():
    return NumberField.rational()


@pytest.fixture
def Qi():
    return NumberField.quadratic(-1)


def zeta_borwein(s: float, n: int = 40) -> float:
    """Riemann zeta for real s > 0, s != 1, from the accelerated alternating series."""
    d = [0.0] * (n + 1)
    acc = 0.0
    for i in range(n + 1):
        acc += math.factorial(n + i - 1) * 4**i / (math.factorial(n - i) * math.factorial(2 * i)) if i else 1 / n
        d[i] = n * acc
    eta = 0.0
    for k in range(n):
        eta += (-1) ** k * (d[k] - d[n]) / (k + 1) ** s
    eta = -eta / d[n]
    return eta / (1 - 2 ** (1 - s))


def gaussian_ideal_counts(N: int) -> list[int]:
    """a(n) for Z[i] from lattice points: #{(a, b): a^2 + b^2 = n} / 4."""
    r = [0] * (N + 1)
    b_max = math.isqrt(N)
    for a in range(-b_max, b_max + 1):
        for b in range(-b_max, b_max + 1):
            n = a * a + b * b
            if 0 < n <= N:
                r[n] += 1
    return [0] + [v // 4 for v in r[1:]]
