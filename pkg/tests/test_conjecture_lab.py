from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from prodlab.conjecture_lab import (
    conjecture_report,
    estimate_general_limit,
    fit_trend,
    pippenger_factor_count,
    recognize_constant,
)
from prodlab.errors import BudgetExceeded
from prodlab.numerics import PrecisionReal


def fifty_digits(fn) -> PrecisionReal:
    with mpmath.workprec(256):
        value = fn()
    return PrecisionReal.from_mpf(value, 200)


def test_factor_count():
    assert pippenger_factor_count(2, 1) == 1
    assert pippenger_factor_count(2, 3) == 1 + 2 + 4
    assert pippenger_factor_count(3, 3) == 1 + 4 + 12


@pytest.mark.parametrize(
    "K, blocks, reference",
    [
        (2, 20, lambda: mpmath.e / 2),
        (3, 12, lambda: mpmath.exp(mpf(2) / 3) / mpmath.sqrt(3)),
    ],
)
def test_estimates_for_known_limits(K, blocks, reference):
    report = estimate_general_limit(K, blocks, 128)
    with mpmath.workprec(256):
        assert abs(report.value.value - reference()) < mpf("1e-4")


def test_estimate_k4_is_stable():
    report = estimate_general_limit(4, 10, 128)
    assert report.log_tail_bound.value < mpf("1e-5")
    finer = estimate_general_limit(4, 11, 128)
    assert abs(finer.value.value - report.value.value) <= report.error_bound.value


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        estimate_general_limit(100, 10, 128)
    with pytest.raises(BudgetExceeded):
        conjecture_report([100], 128)


def test_recognizes_e_over_2():
    candidates = recognize_constant(fifty_digits(lambda: mpmath.e / 2), 2)
    top = candidates[0]
    assert (top.x, top.y, top.r) == (1, -1, 1)
    assert top.expr.render() == "e*2^(-1)"


def test_recognizes_base3_limit():
    value = fifty_digits(lambda: mpmath.exp(mpf(2) / 3) / mpmath.sqrt(3))
    top = recognize_constant(value, 3)[0]
    assert (top.x, top.y, top.r) == (Fraction(2, 3), Fraction(-1, 2), 1)
    assert top.expr.render() == "e^(2/3)*3^(-1/2)"


def test_pi_is_not_in_the_basis():
    assert recognize_constant(fifty_digits(lambda: mpmath.pi / 2), 2) == []


def test_candidate_order_is_total_and_deterministic():
    value = fifty_digits(lambda: mpmath.e / 2)
    first = recognize_constant(value, 2)
    second = recognize_constant(value, 2)
    assert [c.to_dict() for c in first] == [c.to_dict() for c in second]
    keys = [c.sort_key() for c in first]
    assert keys == sorted(keys)
    # e * 2^(-1) is also e * 2^(-2) * 2 and e * 2^0 * 1/2
    assert len(first) > 1


def test_fit_trend_finds_simple_forms():
    rows = [
        {"K": K, "candidates": [{"x": str(Fraction(2, K)), "y": str(Fraction(-1, K - 1))}]}
        for K in (2, 3, 4, 5)
    ]
    trend = fit_trend(rows)
    assert trend["x"] == "2/K"
    assert trend["y"] == "-1/(K-1)"
    assert trend["conjectural"] is True
    assert fit_trend(rows[:1]) is None


@pytest.mark.slow
def test_report_rows():
    report = conjecture_report([2, 3], 256, n_blocks=10)
    assert report["conjectural"] is True
    first, second = report["rows"]
    assert first["candidates"][0]["expr"] == "e*2^(-1)"
    assert second["candidates"][0]["expr"] == "e^(2/3)*3^(-1/2)"
    assert first["conjectural"] is False
    assert first["closed_form"] == "e/2"
    assert report["trend"]["x"] == "2/K"
    assert report["trend"]["y"] == "-1/(K-1)"


@pytest.mark.slow
def test_report_rows_beyond_known_cases():
    report = conjecture_report([4, 5], 256, n_blocks=8)
    for row in report["rows"]:
        assert row["conjectural"] is True
        assert "closed_form" not in row
        assert mpf(row["tail_bound"]) < mpf("1e-5")
