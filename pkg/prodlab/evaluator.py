"""
evaluator.py - numeric evaluation of both product families.

Wallis-type products:
- exact rational partial products (by periods or by printed fractions)
- Richardson-extrapolated limits from partial products

Catalan-type products:
- block partial products, summed in log space and exponentiated once
- limits with a log-space tail bound T_n
- the factorial closed forms of the partial products of the sqrt(e)/2 and
  e^(2/3)/sqrt(3) products, and the exponents E_n
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

# import from external packages
import mpmath
from mpmath import mpf

# import from local modules
from prodlab.errors import InsufficientTerms, NoConvergence
from prodlab.gamma_engine import check_balanced, lngamma_mpf
from prodlab.numerics import (
    PrecisionReal,
    as_rational,
    rational_to_mpf,
    working_bits,
)
from prodlab.product_model import (
    CatalanProduct,
    ConstStream,
    PairsStream,
    WallisProduct,
)
from utils.utils_logger import logger

#####################################
# Reports
#####################################

MAX_RICHARDSON_LEVELS = 4
DIRECT_BLOCK_LIMIT = 4096
EXACT_FACTORIAL_LIMIT = 256
DEFAULT_MAX_BLOCKS = 4096


class EvalMethod(enum.Enum):
    EXACT_PARTIAL = "exact-partial"
    EXTRAPOLATED = "extrapolated"
    GAMMA = "gamma"
    STIRLING_CLOSED = "stirling-closed"
    BLOCK_SUM = "block-sum"


def _short(value: mpf) -> str:
    return mpmath.nstr(value, 6)


@dataclass(frozen=True)
class EvalReport:
    """
    A numeric result with how it was obtained.

    error_bound is None when only a heuristic estimate exists
    (extrapolation); block sums also carry the log-space tail bound.
    """

    value: PrecisionReal
    terms_or_blocks_used: int
    method: EvalMethod
    error_bound: Optional[PrecisionReal]
    log_tail_bound: Optional[PrecisionReal] = None
    rational: Optional[Fraction] = None
    error_estimate: Optional[PrecisionReal] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "method": self.method.value,
            "value_decimal": self.value.to_decimal(),
            "precision_bits": self.value.precision_bits,
            "terms_or_blocks_used": self.terms_or_blocks_used,
            "error_bound": (
                "heuristic" if self.error_bound is None else _short(self.error_bound.value)
            ),
        }
        if self.rational is not None:
            out["rational"] = f"{self.rational.numerator}/{self.rational.denominator}"
        if self.log_tail_bound is not None:
            out["log_tail_bound"] = _short(self.log_tail_bound.value)
        if self.error_estimate is not None:
            out["error_estimate"] = _short(self.error_estimate.value)
        return out


def contract_bound(value: PrecisionReal) -> PrecisionReal:
    """Error bound promised by the PrecisionReal contract for this value."""
    return PrecisionReal(value.slack(), value.precision_bits)


#####################################
# Exact Wallis Partials
#####################################


def product_tree(values: Sequence[int]) -> int:
    """Product of many integers by balanced splitting."""
    if not values:
        return 1
    items = list(values)
    while len(items) > 1:
        paired = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


def _period_products(prod: WallisProduct, first: int, stop: int) -> tuple[int, int]:
    """Unreduced numerator and denominator of periods first .. stop-1."""
    nums: list[int] = []
    dens: list[int] = []
    for n in range(first, stop):
        base = prod.period * n
        nums.extend(base + u for u in prod.num_residues)
        dens.extend(base + v for v in prod.den_residues)
    return product_tree(nums), product_tree(dens)


def wallis_partial(prod: WallisProduct, periods: int) -> Fraction:
    """Exact product of the first `periods` complete periods."""
    if periods < 0:
        raise ValueError(f"period count must be >= 0, got {periods}")
    num, den = _period_products(prod, 0, periods)
    return Fraction(num, den)


def wallis_fraction_partial(prod: WallisProduct, count: int) -> Fraction:
    """Exact product of the first `count` printed fractions."""
    if count < 0:
        raise ValueError(f"fraction count must be >= 0, got {count}")
    full, rest = divmod(count, prod.factors_per_period)
    num, den = _period_products(prod, 0, full)
    tail = prod.period_factors(full)[:rest]
    num *= product_tree([a for a, _ in tail])
    den *= product_tree([b for _, b in tail])
    return Fraction(num, den)


def wallis_partial_report(prod: WallisProduct, periods: int, precision_bits: int) -> EvalReport:
    exact = wallis_partial(prod, periods)
    value = PrecisionReal.from_rational(exact, precision_bits)
    zero = PrecisionReal(mpf(0), precision_bits)
    return EvalReport(value, periods, EvalMethod.EXACT_PARTIAL, zero, rational=exact)


def wallis_fraction_report(prod: WallisProduct, count: int, precision_bits: int) -> EvalReport:
    exact = wallis_fraction_partial(prod, count)
    value = PrecisionReal.from_rational(exact, precision_bits)
    zero = PrecisionReal(mpf(0), precision_bits)
    return EvalReport(value, count, EvalMethod.EXACT_PARTIAL, zero, rational=exact)


#####################################
# Richardson Extrapolation
#####################################


def wallis_limit_extrapolated(
    prod: WallisProduct, periods: int, levels: int, precision_bits: int
) -> EvalReport:
    """
    Extrapolate P_N, P_{N/2}, ..., P_{N/2^levels} to N -> infinity assuming
    P_N = L (1 + c1/N + c2/N^2 + ...).
    """
    if not 1 <= levels <= MAX_RICHARDSON_LEVELS:
        raise InsufficientTerms(f"levels must lie in 1..{MAX_RICHARDSON_LEVELS}, got {levels}")
    if periods < 2**levels:
        raise InsufficientTerms(f"{periods} periods cannot support {levels} levels")
    check_balanced(prod)
    logger.info(f"Extrapolating {prod} over {periods} periods, {levels} levels.")

    counts = [periods >> (levels - i) for i in range(levels + 1)]
    bits = working_bits(precision_bits)
    column: list[mpf] = []
    num, den, done = 1, 1, 0
    with mpmath.workprec(bits):
        for count in counts:
            seg_num, seg_den = _period_products(prod, done, count)
            num *= seg_num
            den *= seg_den
            done = count
            column.append(mpf(num) / mpf(den))

        # entry i of level j-1 belongs to counts[i + j - 1]
        table = [column]
        for j in range(1, levels + 1):
            prev = table[-1]
            table.append(
                [
                    prev[i]
                    + (prev[i] - prev[i - 1]) / (mpf(counts[i + j - 1]) / counts[i - 1] - 1)
                    for i in range(1, len(prev))
                ]
            )
        best = table[levels][-1]
        estimate = abs(best - table[levels - 1][-1])

    return EvalReport(
        PrecisionReal.from_mpf(best, precision_bits),
        periods,
        EvalMethod.EXTRAPOLATED,
        None,
        error_estimate=PrecisionReal.from_mpf(estimate, 64),
    )


#####################################
# Catalan Block Sums
#####################################


def _log_ratio(nums: Sequence[int], dens: Sequence[int]) -> mpf:
    return mpmath.log(mpf(product_tree(nums)) / mpf(product_tree(dens)))


def _direct_pairs_log(stream: PairsStream, first: int, stop: int) -> mpf:
    """ln of the product of stream positions first .. stop-1, multiplied out exactly."""
    raws = [stream.raw(t) for t in range(first, stop)]
    return _log_ratio([a for a, _ in raws], [b for _, b in raws])


def _gamma_pairs_log(stream: PairsStream, first: int, stop: int, bits: int) -> mpf:
    """
    Same as _direct_pairs_log, with whole periods n0 .. n1-1 replaced by

        sum_i lnΓ(n1 + u_i/P) - lnΓ(n0 + u_i/P) - lnΓ(n1 + v_i/P) + lnΓ(n0 + v_i/P)
    """
    width = len(stream.pairs)
    lo = first + stream.offset
    hi = stop + stream.offset
    n0 = -(-lo // width)
    n1 = hi // width
    if n1 <= n0:
        return _direct_pairs_log(stream, first, stop)

    head_stop = n0 * width - stream.offset
    tail_start = n1 * width - stream.offset
    inner_bits = bits + n1.bit_length() + 16
    with mpmath.workprec(inner_bits):
        total = mpf(0)
        if head_stop > first:
            total += _direct_pairs_log(stream, first, head_stop)
        if stop > tail_start:
            total += _direct_pairs_log(stream, tail_start, stop)
        P = stream.period
        for u, v in stream.pairs:
            total += lngamma_mpf(Fraction(n1 * P + u, P), inner_bits)
            total -= lngamma_mpf(Fraction(n0 * P + u, P), inner_bits)
            total -= lngamma_mpf(Fraction(n1 * P + v, P), inner_bits)
            total += lngamma_mpf(Fraction(n0 * P + v, P), inner_bits)
        return total


def block_log_sum(prod: CatalanProduct, k: int, bits: int) -> mpf:
    """Sum of ln(factor) over block k (not yet multiplied by its exponent)."""
    # range.__len__ overflows past 2^63 positions
    positions = prod.block_positions(k)
    count = prod.schedule.size(k)
    stream = prod.stream
    local_bits = bits + positions.stop.bit_length()
    with mpmath.workprec(local_bits):
        if isinstance(stream, ConstStream):
            return count * mpmath.log(rational_to_mpf(stream.c))
        if count <= DIRECT_BLOCK_LIMIT:
            return _direct_pairs_log(stream, positions.start, positions.stop)
        return _gamma_pairs_log(stream, positions.start, positions.stop, local_bits)


def catalan_log_partial(prod: CatalanProduct, n_blocks: int, bits: int) -> tuple[mpf, int]:
    """ln of the partial product through n_blocks blocks, and the blocks actually used."""
    used = 0
    with mpmath.workprec(bits):
        total = mpf(0)
        for f, e in prod.prefix:
            total += rational_to_mpf(e) * mpmath.log(rational_to_mpf(f))
        for k in range(1, n_blocks + 1):
            if not prod.has_block(k):
                break
            block = block_log_sum(prod, k, bits)
            total += rational_to_mpf(prod.schedule.exponent(k)) * block
            used = k
            logger.debug(f"block {k}: log sum {mpmath.nstr(block, 12)}")
    return total, used


#####################################
# Tail Bound
#####################################

_TAIL_BITS = 64
_TAIL_MAX_TERMS = 100_000


def _block_log_bound(prod: CatalanProduct, k: int) -> mpf:
    """Upper bound on |ln f| for every factor f of block k."""
    stream = prod.stream
    if isinstance(stream, ConstStream):
        return abs(mpmath.log(rational_to_mpf(stream.c)))
    row = (prod.schedule.start(k) + stream.offset) // len(stream.pairs)
    base = stream.period * row
    bound = max(Fraction(abs(u - v), base + min(u, v)) for u, v in stream.pairs)
    return rational_to_mpf(bound)


def _tail_term(prod: CatalanProduct, k: int) -> mpf:
    weight = prod.schedule.exponent(k) * prod.schedule.size(k)
    return rational_to_mpf(weight) * _block_log_bound(prod, k)


def tail_bound(prod: CatalanProduct, n: int) -> mpf:
    """
    T_n = sum_{k>n} exponent_k * size_k * max |ln f| over block k.

    The infinite sum is truncated once terms fall below 2^-60 of the total,
    and the remainder is estimated geometrically from the last term ratio.
    Returns +inf when the terms stop shrinking.
    """
    with mpmath.workprec(_TAIL_BITS):
        total = mpf(0)
        previous: Optional[mpf] = None
        k = n + 1
        while prod.has_block(k):
            term = _tail_term(prod, k)
            total += term
            if previous is not None and previous > 0 and term > 0:
                ratio = term / previous
                if ratio >= 1 and k - n > 64:
                    return mpmath.inf
                if ratio < 1 and term <= total * mpmath.ldexp(1, -60):
                    return total + term * ratio / (1 - ratio)
            elif term == 0 and previous == 0:
                return total
            previous = term
            k += 1
            if k - n > _TAIL_MAX_TERMS:
                return mpmath.inf
        return total


def _tail_report_fields(
    log_value: mpf, tail: mpf, precision_bits: int
) -> tuple[PrecisionReal, PrecisionReal]:
    with mpmath.workprec(_TAIL_BITS):
        spread = abs(mpmath.exp(log_value)) * mpmath.expm1(tail)
    return (
        PrecisionReal.from_mpf(spread, _TAIL_BITS),
        PrecisionReal.from_mpf(tail, _TAIL_BITS),
    )


def catalan_block_partial(prod: CatalanProduct, n_blocks: int, precision_bits: int) -> EvalReport:
    """Partial product through n_blocks blocks, in log space, with the tail bound."""
    if n_blocks < 0:
        raise ValueError(f"block count must be >= 0, got {n_blocks}")
    bits = working_bits(precision_bits)
    log_value, used = catalan_log_partial(prod, n_blocks, bits)
    with mpmath.workprec(bits):
        value = mpmath.exp(log_value)
    tail = tail_bound(prod, used)
    error, log_tail = _tail_report_fields(log_value, tail, precision_bits)
    return EvalReport(
        PrecisionReal.from_mpf(value, precision_bits),
        used,
        EvalMethod.BLOCK_SUM,
        error,
        log_tail_bound=log_tail,
    )


def blocks_for_tolerance(
    prod: CatalanProduct, tol: Fraction, max_blocks: int = DEFAULT_MAX_BLOCKS
) -> int:
    """Smallest block count whose tail bound falls below tol."""
    limit = rational_to_mpf(as_rational(tol))
    previous = mpmath.inf
    for n in range(max_blocks + 1):
        tail = tail_bound(prod, n)
        if tail < limit or not prod.has_block(n + 1):
            return n
        if not tail < previous:
            raise NoConvergence(f"tail bound stopped decreasing at block {n}")
        previous = tail
    raise NoConvergence(f"tail bound still above {tol} after {max_blocks} blocks")


def catalan_limit(
    prod: CatalanProduct,
    tol: Fraction,
    precision_bits: int,
    max_blocks: int = DEFAULT_MAX_BLOCKS,
) -> EvalReport:
    """Evaluate blocks until the tail bound T_n drops below tol."""
    tol = as_rational(tol)
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    try:
        n = blocks_for_tolerance(prod, tol, max_blocks)
    except NoConvergence as e:
        logger.error(f"ERROR: Catalan limit did not converge: {e}")
        raise
    logger.info(f"Catalan limit: {n} blocks reach tail bound below {float(tol):g}.")
    return catalan_block_partial(prod, n, precision_bits)


#####################################
# Factorial Closed Forms
#####################################


def lnfactorial_mpf(N: int, bits: int) -> mpf:
    """ln N!: exact below 256, Stirling series (through lnΓ(N+1)) above."""
    if N < 0:
        raise ValueError(f"factorial of a negative number: {N}")
    if N < EXACT_FACTORIAL_LIMIT:
        with mpmath.workprec(bits + 16):
            return mpmath.log(math.factorial(N))
    return lngamma_mpf(Fraction(N + 1), bits)


def stirling_lnfactorial(N: int, precision_bits: int) -> PrecisionReal:
    """ln N! under the PrecisionReal contract."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return PrecisionReal.from_mpf(lnfactorial_mpf(N, working_bits(precision_bits)), precision_bits)


def exponent_E(n: int) -> int:
    """E_n = 2n 3^(n-1) - (3^n - 1)/2, the power of 3 in the n-th partial product."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 2 * n * 3 ** (n - 1) - (3**n - 1) // 2


def exponent_E_direct(n: int) -> int:
    """E_n as the sum over k of 3^(n-k) (2 3^(k-1) - 1)."""
    return sum(3 ** (n - k) * (2 * 3 ** (k - 1) - 1) for k in range(1, n + 1))


def closed_partial_sqrt_e(n: int, precision_bits: int) -> PrecisionReal:
    """
    n-th partial product of (2/3)^(1/2) (6*6/(5*7))^(1/4) ... written with factorials:

        2^((n+1)/2) * ((2^n)!^2 / ((2^(n-1))! (2^(n+1))!))^(1/2^n)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    bits = working_bits(precision_bits) + 2 * n + 16
    with mpmath.workprec(bits):
        ln2 = mpmath.log(2)
        inner = (
            2 * lnfactorial_mpf(2**n, bits)
            - lnfactorial_mpf(2 ** (n - 1), bits)
            - lnfactorial_mpf(2 ** (n + 1), bits)
        )
        log_value = mpf(n + 1) / 2 * ln2 + inner / mpf(2) ** n
        value = mpmath.exp(log_value)
    return PrecisionReal.from_mpf(value, precision_bits)


def closed_partial_base3(n: int, precision_bits: int) -> PrecisionReal:
    """
    n-th partial product of the base-3 Pippenger product:

        3^(1/3) * (3^E_n (3^(n-1))! / (3^n)!)^(1/3^n)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    bits = working_bits(precision_bits) + 4 * n + 16
    with mpmath.workprec(bits):
        ln3 = mpmath.log(3)
        inner = (
            exponent_E(n) * ln3
            + lnfactorial_mpf(3 ** (n - 1), bits)
            - lnfactorial_mpf(3**n, bits)
        )
        log_value = ln3 / 3 + inner / mpf(3) ** n
        value = mpmath.exp(log_value)
    return PrecisionReal.from_mpf(value, precision_bits)


def closed_partial_report(n: int, precision_bits: int, base: int = 2) -> EvalReport:
    value = closed_partial_sqrt_e(n, precision_bits) if base == 2 else closed_partial_base3(
        n, precision_bits
    )
    return EvalReport(value, n, EvalMethod.STIRLING_CLOSED, contract_bound(value))
