import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ideal_moments.arith import (
    ZParam,
    classical_moebius,
    classical_ramanujan_sum,
    classical_ramanujan_sum_trig,
    divisor_coeff_table,
    lemma23_local_factor,
    mertens_table,
    moebius,
    moebius_table,
    pair_coeff_table,
    ramanujan_sum,
    ramanujan_sum_divisor,
    ramanujan_sum_local,
    sigma_z,
    verify_lemma21,
    verify_lemma22,
    verify_lemma23_local,
)
from ideal_moments.errors import FieldMismatchError
from ideal_moments.field import NumberField
from ideal_moments.ideals import (
    Ideal,
    enumerate_ideals,
    ideal_divides,
    ideal_divisors,
    ideal_gcd,
    prime_ideal,
    prime_ideals_above,
)

FIELDS = ["Q", "Q(sqrt{-1})", "Q(sqrt{5})", "Q(zeta{5})"]
IDEALS = {s: enumerate_ideals(NumberField.parse(s), 200) for s in FIELDS}


def _Qn(n):
    return next(I for I in IDEALS["Q"] if I.norm == n)


# -- ZParam -----------------------------------------------------------------


def test_zparam_kinds():
    assert ZParam.of(2).exact and ZParam.of(2).kind == "int"
    assert ZParam.of(-1).kind == "object"
    assert ZParam.of(-0.25).kind == "float"
    assert ZParam.of(0.5 + 1j).kind == "complex"
    assert ZParam.of(Fraction(3, 1)).exact
    assert ZParam.of(-1).power(4) == Fraction(1, 4)


# -- moebius and sigma --------------------------------------------------------


def test_moebius_examples(Qi):
    P = prime_ideal(Qi, 5, 0)
    Q = prime_ideal(Qi, 13, 0)
    assert moebius(Ideal.unit(Qi)) == 1
    assert moebius(Ideal.of_prime(P, Qi)) == -1
    assert moebius(Ideal.from_factors(Qi, {P: 2, Q: 1})) == 0


def test_sigma_examples(Qi):
    P = prime_ideal(Qi, 5, 0)
    P2 = Ideal.of_prime(P, Qi, 2)
    assert sigma_z(P2, 0) == 3
    assert sigma_z(Ideal.of_prime(P, Qi), 1) == 6
    five = Ideal.from_factors(Qi, {prime_ideal(Qi, 5, 0): 1, prime_ideal(Qi, 5, 1): 1})
    assert sigma_z(five, 1) == 36
    assert sigma_z(five, 1) == sum(D.norm for D in ideal_divisors(five))


@pytest.mark.parametrize("z", [0, 1, 2, -1, -0.25, 0.3 + 0.7j])
def test_sigma_against_divisor_expansion(z):
    zp = ZParam.of(z)
    for I in IDEALS["Q(zeta{5})"][:60]:
        direct = sum(zp.power(D.norm) for D in ideal_divisors(I))
        got = sigma_z(I, z)
        if zp.kind in ("int", "object"):
            assert got == direct
        else:
            assert abs(got - direct) <= 1e-12 * abs(direct)


# -- Ramanujan sums -------------------------------------------------------------


def test_ramanujan_examples(QQ, Qi):
    for I in IDEALS["Q(sqrt{-1})"][:30]:
        assert ramanujan_sum(Ideal.unit(Qi), I) == 1
    P = prime_ideal(Qi, 5, 0)
    I = Ideal.of_prime(prime_ideal(Qi, 13, 1), Qi)
    assert ramanujan_sum(Ideal.of_prime(P, Qi), I) == -1
    assert ramanujan_sum(_Qn(6), _Qn(4)) == -1
    one = Ideal.unit(QQ)
    for q in range(1, 51):
        assert ramanujan_sum(_Qn(q), one) == classical_moebius(q)


def test_classical_reduction_small():
    for q in range(1, 80):
        for n in range(1, 80):
            assert ramanujan_sum(_Qn(q), _Qn(n)) == classical_ramanujan_sum(q, n)


def test_classical_definitions_agree():
    for q in range(1, 40):
        for n in range(1, 40):
            assert classical_ramanujan_sum(q, n) == classical_ramanujan_sum_trig(q, n)


def test_field_mismatch():
    a = Ideal.unit(NumberField.quadratic(-1))
    b = Ideal.unit(NumberField.quadratic(5))
    with pytest.raises(FieldMismatchError):
        ramanujan_sum(a, b)
    with pytest.raises(FieldMismatchError):
        ramanujan_sum_divisor(a, b)


@given(st.data())
def test_path_equivalence(data):
    name = data.draw(st.sampled_from(FIELDS))
    J = data.draw(st.sampled_from(IDEALS[name]))
    I = data.draw(st.sampled_from(IDEALS[name]))
    assert ramanujan_sum_local(J, I) == ramanujan_sum_divisor(J, I)


@pytest.mark.parametrize("name", FIELDS)
def test_path_equivalence_random_large(name):
    K = NumberField.parse(name)
    ideals = enumerate_ideals(K, 10**4)
    rng = random.Random(20240917)
    for _ in range(2500):
        J, I = rng.choice(ideals), rng.choice(ideals)
        assert ramanujan_sum_local(J, I) == ramanujan_sum_divisor(J, I)


@pytest.mark.parametrize("name", FIELDS)
def test_bounds_and_euler_phi(name):
    ideals = IDEALS[name]
    for J in ideals[:80]:
        for I in ideals:
            c = ramanujan_sum(J, I)
            assert abs(c) <= sigma_z(ideal_gcd(I, J), 1)
            if ideal_divides(J, I):
                phi = sum(D.norm * moebius(Ideal.from_factors(J.field, _div(J, D))) for D in ideal_divisors(J))
                assert c == phi > 0


def _div(J, D):
    d = D.as_dict()
    return {P: k - d.get(P, 0) for P, k in J.factors if k - d.get(P, 0)}


@pytest.mark.parametrize("name", FIELDS)
def test_multiplicativity(name):
    ideals = IDEALS[name]
    small = [I for I in ideals if I.norm <= 40]
    for A in small:
        for B in small:
            if A.norm * B.norm > 200 or not ideal_gcd(A, B).is_unit:
                continue
            AB = A * B
            assert moebius(AB) == moebius(A) * moebius(B)
            assert sigma_z(AB, 1) == sigma_z(A, 1) * sigma_z(B, 1)
            assert sigma_z(AB, 0) == sigma_z(A, 0) * sigma_z(B, 0)
            for I in ideals[::7]:
                assert ramanujan_sum(AB, I) == ramanujan_sum(A, I) * ramanujan_sum(B, I)


def _swap_conjugates(I: Ideal) -> Ideal:
    K = I.field
    out = {}
    for P, k in I.factors:
        g = len(prime_ideals_above(K, P.p))
        out[prime_ideal(K, P.p, (P.index + 1) % g)] = k
    return Ideal.from_factors(K, out)


@pytest.mark.parametrize("name", ["Q(sqrt{-1})", "Q(zeta{5})"])
def test_conjugate_symmetry(name):
    ideals = IDEALS[name]
    for J in ideals[:60]:
        Js = _swap_conjugates(J)
        assert Js.norm == J.norm
        for I in ideals[:60]:
            Is = _swap_conjugates(I)
            assert ramanujan_sum(Js, Is) == ramanujan_sum(J, I)
            assert sigma_z(Is, 1) == sigma_z(I, 1)
            assert moebius(Is) == moebius(I)


# -- tables -------------------------------------------------------------------


def test_mertens_examples(ref_field, QQ, Qi):
    assert int(mertens_table(ref_field, 1)[1]) == 1
    assert int(mertens_table(QQ, 10)[10]) == -1
    assert int(mertens_table(Qi, 2)[2]) == 0


def test_mertens_against_enumeration(ref_field):
    N = 2000
    t = mertens_table(ref_field, N)
    running = [0] * (N + 1)
    for I in enumerate_ideals(ref_field, N):
        running[I.norm] += moebius(I)
    acc = 0
    for n in range(1, N + 1):
        acc += running[n]
        assert int(t[n]) == acc
    mu = moebius_table(ref_field, N)
    assert [int(v) for v in mu.values] == running


def test_coefficient_examples(ref_field, Qi):
    assert divisor_coeff_table(ref_field, 1, 0.3)[1] == 1
    assert divisor_coeff_table(Qi, 2, 1)[2] == 3
    assert pair_coeff_table(Qi, 5, 0, 0)[5] == 8


@pytest.mark.parametrize("z1, z2", [(0, 0), (1, 2), (-0.2, -0.1), (-1, 0)])
def test_pair_table_against_enumeration(z1, z2):
    K = NumberField.parse("Q(sqrt{5})")
    N = 400
    t = pair_coeff_table(K, N, z1, z2)
    ref = [0] * (N + 1)
    for I in enumerate_ideals(K, N):
        ref[I.norm] += sigma_z(I, z1) * sigma_z(I, z2)
    for n in range(1, N + 1):
        assert abs(complex(t[n]) - complex(ref[n])) <= 1e-9 * max(1.0, abs(complex(ref[n])))


def test_negative_integer_z_exact(Qi):
    t = divisor_coeff_table(Qi, 50, -1)
    assert t[5] == 2 * Fraction(6, 5)
    assert t.exact


# -- identity verifiers ------------------------------------------------------------


def test_lemma21_examples(QQ, Qi):
    for name in FIELDS:
        K = NumberField.parse(name)
        assert verify_lemma21(K, Ideal.unit(K), 60)
    assert verify_lemma21(QQ, _Qn(4), 12)
    P5 = Ideal.of_prime(prime_ideal(Qi, 5, 0), Qi)
    assert verify_lemma21(Qi, P5, 50)


def test_lemma22_examples(QQ, Qi):
    r = verify_lemma22(Qi, 2, 1)
    assert r.ok and r.checked == 2
    assert verify_lemma22(QQ, 1, 0)
    tau = divisor_coeff_table(QQ, 100, 0)
    assert all(tau[n] == sum(1 for d in range(1, n + 1) if n % d == 0) for n in range(1, 101))
    assert verify_lemma22(QQ, 100, 0)


def test_lemma22_rejects_inexact(QQ):
    with pytest.raises(ValueError):
        verify_lemma22(QQ, 10, -1)


def test_lemma23_examples(QQ, Qi):
    assert lemma23_local_factor(2, 1, 1)[:2] == [1, 4]
    assert verify_lemma23_local(QQ, 2, 1)
    assert verify_lemma23_local(Qi, 5, 6)
    assert verify_lemma23_local(Qi, 2, 6)
    assert verify_lemma23_local(Qi, 3, 6)


@pytest.mark.parametrize("z1, z2", [(0.3, -0.2), (1.5, 0.25), (0.2 + 0.5j, -0.1)])
def test_lemma23_floating(z1, z2):
    K = NumberField.parse("Q(zeta{5})")
    for p in (2, 5, 11):
        assert verify_lemma23_local(K, p, 5, z1, z2)


def test_verifiers_detect_corruption(Qi):
    from ideal_moments.ideals import ideal_count_table, CoefficientTable

    counts = ideal_count_table(Qi, 100)
    bad = counts.values.copy()
    bad[13] += 1
    bad_t = CoefficientTable(Qi, "a_K", 100, bad)
    r = verify_lemma22(Qi, 100, 1, counts=bad_t)
    assert not r.ok and r.first_failure == 13
    r = verify_lemma21(Qi, Ideal.unit(Qi), 100, counts=bad_t)
    assert not r.ok and r.first_failure == 13
