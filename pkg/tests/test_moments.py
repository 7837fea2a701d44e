import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ideal_moments import moments
from ideal_moments.analytic import constants
from ideal_moments.arith import mertens_table, ramanujan_sum_divisor
from ideal_moments.errors import DegenerateInputError, TableCoverageError
from ideal_moments.field import NumberField
from ideal_moments.ideals import Ideal, enumerate_ideals, ideal_count_table
from ideal_moments.moments import (
    avg_sigma,
    avg_sigma_pair,
    first_moment,
    fit_error_exponent,
    inner_sum,
    moment_sums,
    moment_sums_direct,
    second_moment,
)

FIELDS = ["Q", "Q(sqrt{-1})", "Q(sqrt{5})", "Q(zeta{5})"]


def test_inner_sum_examples(QQ, ref_field):
    two, three = (next(I for I in enumerate_ideals(QQ, 3) if I.norm == n) for n in (2, 3))
    assert inner_sum(QQ, 2, two) == 2
    assert inner_sum(QQ, 2, three) == 0
    M = mertens_table(ref_field, 50)
    for x in (1, 7, 50):
        assert inner_sum(ref_field, x, Ideal.unit(ref_field)) == int(M[x])


def test_inner_sum_coverage(QQ):
    with pytest.raises(TableCoverageError):
        inner_sum(QQ, 100, Ideal.unit(QQ), mertens=mertens_table(QQ, 50))


@pytest.mark.parametrize("name", FIELDS)
def test_inner_sum_oracle(name):
    K = NumberField.parse(name)
    ideals = enumerate_ideals(K, 1000)
    M = mertens_table(K, 500)
    rng = random.Random(moments.DEFAULT_SEED)
    for _ in range(30):
        I, x = rng.choice(ideals), rng.randint(1, 500)
        assert inner_sum(K, x, I, "mertens", M) == inner_sum(K, x, I, "brute")


def test_moment_examples(QQ, Qi):
    assert moment_sums(QQ, 2, 3) == (2, 4)
    assert first_moment(QQ, 2, 3).empirical == 2
    assert second_moment(QQ, 2, 3).empirical == 4
    assert first_moment(QQ, 1, 37).empirical == 37
    assert first_moment(Qi, 1, 10).empirical == 9


@pytest.mark.parametrize("name", FIELDS)
def test_x_equal_one_counts_ideals(name):
    K = NumberField.parse(name)
    n = ideal_count_table(K, 500).partial_sum(500)
    assert moment_sums(K, 1, 500) == (n, n)


@settings(max_examples=40)
@given(
    st.sampled_from(FIELDS),
    st.integers(min_value=1, max_value=60),
    st.integers(min_value=1, max_value=600),
)
def test_accelerated_matches_direct(name, x, y):
    K = NumberField.parse(name)
    fast = moment_sums(K, x, y)
    assert fast == moment_sums_direct(K, x, y, "mertens")
    assert fast[1] >= 0


@pytest.mark.parametrize("name", FIELDS)
def test_accelerated_matches_brute(name):
    K = NumberField.parse(name)
    assert moment_sums(K, 40, 400) == moment_sums_direct(K, 40, 400, "brute")


def test_brute_definition_gaussian(Qi):
    # straight from the double sum over J and I
    Js = enumerate_ideals(Qi, 12)
    Is = enumerate_ideals(Qi, 90)
    S = [sum(ramanujan_sum_divisor(J, I) for J in Js) for I in Is]
    assert moment_sums(Qi, 12, 90) == (sum(S), sum(s * s for s in S))


def test_parallel_is_identical(monkeypatch, Qi):
    monkeypatch.setattr(moments, "PARALLEL_THRESHOLD", 1)
    serial = moment_sums(Qi, 30, 20000, workers=1)
    for w in (2, 3, 8):
        assert moment_sums(Qi, 30, 20000, workers=w) == serial


def test_second_moment_extras(Qi):
    r = second_moment(Qi, 40, 10**5)
    assert r.regime == "above"
    assert r.c2 == 0.5
    for key in ("predicted_c2=1_above", "predicted_c2=0.5_below", "c2_ratio", "natural_regime", "near_boundary"):
        assert key in r.extras
    assert r.extras["near_boundary"] is False
    assert math.isclose(r.predicted, r.extras["predicted_c2=0.5_above"])
    assert math.isclose(r.normalized_residual, r.residual / (10**5 * 40**1.5))


def test_second_moment_cyclotomic_reports_alternative_scale():
    K = NumberField.cyclotomic(5)
    r = second_moment(K, 20, 2000)
    assert "normalized_residual_cyclotomic" in r.extras and "cyclotomic_note" in r.extras


def test_first_moment_normalization(Qi):
    r = first_moment(Qi, 10, 1000)
    assert r.predicted == pytest.approx(constants(Qi).rho * 1000)
    assert r.normalized_residual == pytest.approx(r.residual / (10 * math.sqrt(1000) * math.log(10)))


def test_avg_sigma_examples(QQ, Qi, ref_field):
    assert avg_sigma(QQ, 4, 0) == 8
    assert avg_sigma(ref_field, 1, -0.25) == 1
    assert avg_sigma(Qi, 2, 1) == 4
    assert avg_sigma_pair(ref_field, 1, -0.2, -0.1) == 1
    assert avg_sigma_pair(QQ, 4, 0, 0) == 1 + 4 + 4 + 9


def test_avg_sigma_results(Qi):
    r = moments.avg_sigma_result(Qi, 10**4, -0.25)
    assert r.predicted is not None and abs(r.normalized_residual) < 20
    p = moments.avg_sigma_pair_result(Qi, 10**4, -0.2, -0.1)
    assert p.extras["error_exponent"] == pytest.approx((1 - 0.3) / 2 + 2 * 0.1 * 2)


def test_fit_examples():
    pts = [(s, s**0.5) for s in (10.0, 100.0, 1000.0, 1e4)]
    slope, intercept, r2 = fit_error_exponent(pts)
    assert slope == pytest.approx(0.5) and r2 == pytest.approx(1.0)
    slope, intercept, _ = fit_error_exponent([(s, 7 * s * s) for s in (2.0, 3.0, 5.0)])
    assert slope == pytest.approx(2.0) and intercept == pytest.approx(math.log(7))


def test_fit_degenerate():
    with pytest.raises(DegenerateInputError):
        fit_error_exponent([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(DegenerateInputError):
        fit_error_exponent([(1.0, 1.0), (2.0, 0.0), (3.0, 0.0)])


def test_accumulator_guard(monkeypatch, QQ):
    monkeypatch.setattr(moments, "_INT128_MAX", 10)
    with pytest.raises(OverflowError):
        moment_sums(QQ, 5, 50)


@pytest.mark.parametrize("name", ["Q", "Q(sqrt{-1})"])
@pytest.mark.parametrize("x, y", [(40, 10**5), (60, 10**6)])
def test_c2_convention_probe(name, x, y):
    # the half coefficient on y x^2 should fit better than the full one
    r = second_moment(NumberField.parse(name), x, y)
    assert r.extras["c2_ratio"] < 1
