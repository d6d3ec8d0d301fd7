import math
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from prodlab.errors import InsufficientTerms, NoConvergence, UnbalancedProduct
from prodlab.evaluator import (
    EvalMethod,
    _direct_pairs_log,
    block_log_sum,
    catalan_block_partial,
    catalan_limit,
    closed_partial_base3,
    closed_partial_sqrt_e,
    exponent_E,
    exponent_E_direct,
    product_tree,
    stirling_lnfactorial,
    tail_bound,
    wallis_fraction_partial,
    wallis_limit_extrapolated,
    wallis_partial,
    wallis_partial_report,
)
from prodlab.gamma_engine import eq21_eval
from prodlab.product_model import (
    CatalanProduct,
    ConstStream,
    PippengerSchedule,
    WallisProduct,
    builtin,
    wallis_general,
)
from tests.conftest import oracle, rel_close


def test_product_tree():
    assert product_tree([]) == 1
    assert product_tree(list(range(1, 21))) == math.factorial(20)


@pytest.mark.parametrize(
    "equation, periods, expected",
    [(1, 3, Fraction(256, 175)), (1, 0, Fraction(1)), (12, 2, Fraction(81, 70))],
)
def test_wallis_partial(equation, periods, expected):
    assert wallis_partial(builtin(equation), periods) == expected


def test_wallis_partial_matches_brute_force():
    prod = builtin(10)
    expected = Fraction(1)
    for n in range(7):
        for a, b in prod.period_factors(n):
            expected *= Fraction(a, b)
    assert wallis_partial(prod, 7) == expected


def test_wallis_fraction_partial():
    prod = builtin(1)
    assert wallis_fraction_partial(prod, 0) == 1
    assert wallis_fraction_partial(prod, 1) == 2
    assert wallis_fraction_partial(prod, 3) == Fraction(16, 9)
    assert wallis_fraction_partial(prod, 6) == wallis_partial(prod, 3)


def test_wallis_partial_report():
    report = wallis_partial_report(builtin(1), 3, 64)
    assert report.method is EvalMethod.EXACT_PARTIAL
    doc = report.to_dict()
    assert doc["rational"] == "256/175"
    assert doc["value_decimal"].startswith("1.462857142857")


@pytest.mark.parametrize(
    "prod, reference",
    [
        (builtin(1), lambda: mpmath.pi / 2),
        (builtin(7), lambda: mpf(2)),
        (wallis_general(5), lambda: (mpmath.pi / 5) / mpmath.sinpi(mpf(1) / 5)),
    ],
)
def test_extrapolated_limits(prod, reference):
    report = wallis_limit_extrapolated(prod, 2**14, 3, 128)
    assert report.method is EvalMethod.EXTRAPOLATED
    assert report.error_bound is None
    assert report.to_dict()["error_bound"] == "heuristic"
    assert abs(report.value.value - oracle(reference)) < mpf("1e-9")


def test_extrapolation_preconditions():
    with pytest.raises(InsufficientTerms):
        wallis_limit_extrapolated(builtin(1), 2**14, 5, 128)
    with pytest.raises(InsufficientTerms):
        wallis_limit_extrapolated(builtin(1), 4, 3, 128)
    with pytest.raises(InsufficientTerms):
        wallis_limit_extrapolated(builtin(1), 64, 0, 128)
    with pytest.raises(UnbalancedProduct):
        wallis_limit_extrapolated(WallisProduct(2, (2, 2), (1, 2)), 64, 2, 128)


def test_first_blocks():
    first = catalan_block_partial(builtin(16).without_prefix(), 1, 128)
    assert rel_close(first.value.value, oracle(lambda: mpmath.sqrt(mpf(2) / 3)), 126)
    cube = catalan_block_partial(builtin(18), 1, 128)
    assert rel_close(cube.value.value, oracle(lambda: mpmath.cbrt(mpf(3) / 2)), 126)
    assert cube.terms_or_blocks_used == 1
    assert cube.method is EvalMethod.BLOCK_SUM


def test_geometric_partial():
    report = catalan_block_partial(builtin(20), 10, 128)
    expected = oracle(lambda: mpf(2) ** (1 - mpf(2) ** -10))
    assert rel_close(report.value.value, expected, 126)


def test_block_partial_matches_direct_multiplication():
    report = catalan_block_partial(builtin(5), 3, 128)

    def direct():
        value = mpmath.sqrt(2)
        value *= (mpf(2) / 3 * mpf(4) / 3) ** (mpf(1) / 4)
        value *= (mpf(4) / 5 * mpf(6) / 5 * mpf(6) / 7 * mpf(8) / 7) ** (mpf(1) / 8)
        return value

    assert rel_close(report.value.value, oracle(direct), 126)


def test_prefix_contributes():
    with_prefix = catalan_block_partial(builtin(4), 4, 128).value.value
    without = catalan_block_partial(builtin(4).without_prefix(), 4, 128).value.value
    assert rel_close(with_prefix, oracle(lambda: 2 * without), 120)


def test_block_with_more_than_2_63_factors():
    k = 70
    prod = builtin(5)
    assert prod.schedule.size(k) > 2**63
    fast = block_log_sum(prod, k, 128)

    # block k of (2n+2)/(2n+1), (2n+2)/(2n+3) runs from pair n_a (second half) to pair n_b (first half)
    n_a, n_b = 2 ** (k - 2) - 1, 2 ** (k - 1) - 1
    with mpmath.workprec(600):
        lo, hi = n_a + 1, n_b - 1

        def run(c):
            return mpmath.loggamma(hi + 1 + mpf(c) / 2) - mpmath.loggamma(lo + mpf(c) / 2)

        exact = (
            mpmath.log(mpf(2 * n_a + 2) / (2 * n_a + 3))
            + mpmath.log(mpf(2 * n_b + 2) / (2 * n_b + 1))
            + 2 * run(2)
            - run(1)
            - run(3)
        )
        assert 0 < abs(exact) < mpf(2) ** -60
        assert abs(fast - exact) < mpf(2) ** -190


def test_const_stream_block_with_more_than_2_63_factors():
    prod = CatalanProduct((), ConstStream(Fraction(2)), PippengerSchedule(2))
    value = block_log_sum(prod, 70, 128)
    assert rel_close(value, oracle(lambda: mpf(2) ** 69 * mpmath.log(2)), 120)


def test_catalan_limit_past_block_64():
    report = catalan_limit(builtin(5), Fraction(1, 10**25), 128)
    assert report.terms_or_blocks_used > 64
    observed = abs(report.value.value - oracle(lambda: mpmath.e / 2))
    assert observed < mpf("1e-24")
    assert observed <= 10 * report.error_bound.value


@pytest.mark.parametrize("equation, k", [(5, 15), (16, 15), (18, 10), (17, 16)])
def test_gamma_accelerated_blocks_match_direct_logs(equation, k):
    prod = builtin(equation)
    positions = prod.block_positions(k)
    assert len(positions) > 4096
    with mpmath.workprec(256):
        fast = block_log_sum(prod, k, 256)
    with mpmath.workprec(400):
        slow = _direct_pairs_log(prod.stream, positions.start, positions.stop)
    assert abs(fast - slow) < mpf(10) ** -60


@pytest.mark.parametrize("equation", [4, 5, 15, 16, 17, 18, 20])
def test_tail_bound_strictly_decreasing(equation):
    prod = builtin(equation)
    tails = [tail_bound(prod, n) for n in range(1, 12)]
    assert all(later < earlier for earlier, later in zip(tails, tails[1:]))


@pytest.mark.parametrize(
    "equation, reference",
    [
        (5, lambda: mpmath.e / 2),
        (15, lambda: mpmath.e / 4),
        (20, lambda: mpf(2)),
    ],
)
def test_catalan_limit(equation, reference):
    report = catalan_limit(builtin(equation), Fraction(1, 10**5), 128)
    truth = oracle(reference)
    assert report.log_tail_bound.value < mpf("1e-5")
    observed = abs(report.value.value - truth)
    assert observed < mpf("1e-4")
    assert observed <= 10 * report.error_bound.value


def test_geometric_limit_tight_tolerance():
    report = catalan_limit(builtin(20), Fraction(1, 10**12), 128)
    assert abs(report.value.value - 2) < mpf("1e-11")


def test_no_convergence_for_flat_tail():
    prod = CatalanProduct((), ConstStream(Fraction(2)), PippengerSchedule(2))
    with pytest.raises(NoConvergence):
        catalan_limit(prod, Fraction(1, 10**5), 64)


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 8), (3, 41)])
def test_exponent_E(n, expected):
    assert exponent_E(n) == expected


def test_exponent_E_closed_form_equals_sum():
    for n in range(1, 31):
        assert exponent_E(n) == exponent_E_direct(n)


@pytest.mark.parametrize("N, expected", [(1, 0), (5, math.log(120))])
def test_stirling_lnfactorial_small(N, expected):
    assert abs(float(stirling_lnfactorial(N, 64)) - expected) < 1e-15


@pytest.mark.parametrize("N", [255, 256, 1000, 10**6])
def test_stirling_lnfactorial_large(N):
    value = stirling_lnfactorial(N, 128)
    assert rel_close(value.value, oracle(lambda: mpmath.loggamma(N + 1)), 122)


def test_closed_partial_sqrt_e_values():
    assert rel_close(closed_partial_sqrt_e(1, 128).value, oracle(lambda: mpmath.sqrt(mpf(2) / 3)), 124)
    assert rel_close(closed_partial_sqrt_e(2, 128).value, oracle(lambda: 2 / mpf(35) ** (mpf(1) / 4)), 124)
    assert abs(closed_partial_sqrt_e(20, 128).value - oracle(lambda: mpmath.sqrt(mpmath.e) / 2)) < mpf("1e-3")


def test_closed_partial_base3_values():
    assert rel_close(closed_partial_base3(1, 128).value, oracle(lambda: mpmath.cbrt(mpf(3) / 2)), 124)
    second = oracle(lambda: (mpf(3) ** 8 / (2 * 4 * 5 * 7 * 8)) ** (mpf(1) / 9))
    assert rel_close(closed_partial_base3(2, 128).value, second, 124)
    target = oracle(lambda: mpmath.exp(mpf(2) / 3) / mpmath.sqrt(3))
    assert abs(closed_partial_base3(10, 128).value - target) < mpf("1e-3")


@pytest.mark.parametrize("n", [1, 2, 5, 9, 14])
def test_closed_sqrt_e_matches_block_evaluation(n):
    closed = closed_partial_sqrt_e(n, 128)
    generic = catalan_block_partial(builtin(16).without_prefix(), n, 128)
    assert abs(closed.value - generic.value.value) <= mpf(2) ** -118


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_closed_base3_matches_block_evaluation(n):
    closed = closed_partial_base3(n, 128)
    generic = catalan_block_partial(builtin(18), n, 128)
    assert abs(closed.value - generic.value.value) <= mpf(2) ** -118


def test_gamma_and_extrapolation_agree():
    prod = builtin(9)
    gamma_value = eq21_eval(prod, 128).value
    extrapolated = wallis_limit_extrapolated(prod, 2**14, 3, 128).value.value
    assert abs(gamma_value - extrapolated) < mpf("1e-9")
