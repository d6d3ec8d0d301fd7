"""
gamma_engine.py - arbitrary-precision lnΓ, Γ, sin(πx), and the gamma-ratio
evaluation of balanced periodic products.

lnΓ uses the Stirling asymptotic series with exact Bernoulli coefficients,
after lifting small arguments with Γ(x) = Γ(x+m) / (x (x+1) ... (x+m-1)).
A balanced product

    prod_{n>=0} prod_j (P n + u_j) / (P n + v_j),   sum u_j = sum v_j

equals prod_j Γ(v_j/P) / prod_j Γ(u_j/P), which is how eq21_eval gets
its value without touching a single partial product.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

# import from external packages
import mpmath
from mpmath import mpf

# import from local modules
from prodlab.errors import NonpositiveArgument, UnbalancedProduct
from prodlab.numerics import (
    ConstExpr,
    Div,
    Integer,
    Mul,
    Pi,
    Pow,
    PrecisionReal,
    Rat,
    SinPi,
    Sqrt,
    Sub,
    Add,
    pi_mpf,
    rational_to_mpf,
    sin_pi_mpf,
    working_bits,
)
from prodlab.product_model import WallisProduct
from utils.utils_logger import logger

#####################################
# Bernoulli Numbers
#####################################

# B_0, B_2, B_4, ... appended in order, never rewritten
_even_bernoulli: list[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(n: int) -> Fraction:
    """
    Exact Bernoulli number B_n for even n >= 2.

    Built from sum_{k=0}^{m} C(m+1, k) B_k = 0 with B_1 = -1/2; only even
    indices are stored since the odd ones past B_1 vanish.
    """
    if n < 2 or n % 2:
        raise ValueError(f"bernoulli() needs an even n >= 2, got {n}")
    index = n // 2
    if index < len(_even_bernoulli):
        return _even_bernoulli[index]
    with _bernoulli_lock:
        while len(_even_bernoulli) <= index:
            m = 2 * len(_even_bernoulli)
            total = Fraction(-(m + 1), 2)
            for j, b in enumerate(_even_bernoulli):
                total += math.comb(m + 1, 2 * j) * b
            _even_bernoulli.append(-total / (m + 1))
    return _even_bernoulli[index]


#####################################
# Stirling Series
#####################################

LN2_OVER_2PI = math.log(2) / (2 * math.pi)


@dataclass(frozen=True)
class StirlingConfig:
    """Argument lift threshold and series length for one working precision."""

    shift_threshold: int
    series_terms: int


def _log2_abs_term(k: int, x: float) -> float:
    """log2 |B_2k / (2k (2k-1) x^(2k-1))|."""
    b = bernoulli(2 * k)
    log2_b = math.log2(abs(b.numerator)) - math.log2(b.denominator)
    return log2_b - math.log2(2 * k * (2 * k - 1)) - (2 * k - 1) * math.log2(x)


_config_cache: dict[int, StirlingConfig] = {}


def stirling_config(bits: int) -> StirlingConfig:
    """
    Pick the lift threshold and number of series terms for `bits`.

    The smallest Stirling term at argument x is about exp(-2πx), so the
    threshold sits a little above (bits + 8) ln2 / 2π; the series length is
    the first k whose term drops below 2^-(bits+8) at the threshold.
    """
    cached = _config_cache.get(bits)
    if cached is not None:
        return cached
    threshold = max(8, math.ceil((bits + 8) * LN2_OVER_2PI) + 4)
    k = 1
    while _log2_abs_term(k, threshold) >= -(bits + 8):
        k += 1
    config = StirlingConfig(shift_threshold=threshold, series_terms=k)
    _config_cache[bits] = config
    logger.debug(f"Stirling config for {bits} bits: {config}")
    return config


def _stirling_series(z: mpf, bits: int, terms: int) -> mpf:
    """(z - 1/2) ln z - z + ln(2π)/2 + sum_k B_2k / (2k (2k-1) z^(2k-1))."""
    eps = mpmath.ldexp(mpf(1), -(bits + 8))
    inv = 1 / z
    inv2 = inv * inv
    power = inv
    total = (z - mpf(1) / 2) * mpmath.log(z) - z + mpmath.log(2 * pi_mpf(bits)) / 2
    for k in range(1, terms + 1):
        term = rational_to_mpf(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) * power
        total += term
        if abs(term) < eps:
            break
        power *= inv2
    return total


def lngamma_mpf(x: Fraction, bits: int) -> mpf:
    """
    lnΓ(x) for rational x > 0 at `bits` of working precision (not rounded).

    Integer arguments up to 256 come from the exact factorial; others are
    lifted above the threshold with the factorial property and fed to the
    Stirling series.
    """
    if x <= 0:
        raise NonpositiveArgument(f"lnΓ needs x > 0, got {x}")
    # room for the size of (x - 1/2) ln x before cancellation
    extra = max(1, math.ceil(x)).bit_length() + 8
    with mpmath.workprec(bits + extra):
        if x.denominator == 1 and x <= 256:
            return mpmath.log(math.factorial(int(x) - 1))
        config = stirling_config(bits)
        lift = Fraction(1)
        z = x
        if z < config.shift_threshold:
            m = math.ceil(config.shift_threshold - z)
            for i in range(m):
                lift *= x + i
            z = x + m
        value = _stirling_series(rational_to_mpf(z), bits, config.series_terms)
        if lift != 1:
            value -= mpmath.log(lift.numerator) - mpmath.log(lift.denominator)
        return value


def lngamma(x: Fraction, precision_bits: int) -> PrecisionReal:
    """lnΓ(x) for rational x > 0 under the PrecisionReal contract."""
    x = Fraction(x)
    bits = working_bits(precision_bits)
    return PrecisionReal.from_mpf(lngamma_mpf(x, bits), precision_bits)


def gamma(x: Fraction, precision_bits: int) -> PrecisionReal:
    """Γ(x) for rational x > 0, exponentiated from the unrounded lnΓ."""
    x = Fraction(x)
    bits = working_bits(precision_bits)
    log_value = lngamma_mpf(x, bits)
    with mpmath.workprec(bits):
        value = mpmath.exp(log_value)
    return PrecisionReal.from_mpf(value, precision_bits)


#####################################
# Sine Values
#####################################

SQRT2 = Sqrt(Integer(2))

# exact sin(πx) for the arguments the closed forms need
SINE_RADICALS: dict[Fraction, ConstExpr] = {
    Fraction(1, 2): Integer(1),
    Fraction(1, 3): Div(Sqrt(Integer(3)), Integer(2)),
    Fraction(1, 4): Div(Integer(1), SQRT2),
    Fraction(1, 6): Rat(Fraction(1, 2)),
    Fraction(1, 8): Div(Integer(1), Sqrt(Add(Integer(4), Sqrt(Integer(8))))),
    Fraction(3, 8): Div(Integer(1), Sqrt(Sub(Integer(4), Sqrt(Integer(8))))),
}


def sine_radical(x: Fraction) -> Optional[ConstExpr]:
    """Exact radical for sin(πx) when x is in the table (after symmetry), else None."""
    r = x - 2 * math.floor(x / 2)
    if r >= 1:
        return None
    if r > Fraction(1, 2):
        r = 1 - r
    return SINE_RADICALS.get(r)


def sin_pi(x: Fraction, precision_bits: int) -> PrecisionReal:
    """sin(πx) for rational x under the PrecisionReal contract."""
    bits = working_bits(precision_bits)
    with mpmath.workprec(bits):
        value = sin_pi_mpf(Fraction(x), bits)
    return PrecisionReal.from_mpf(value, precision_bits)


#####################################
# Balanced Products
#####################################


def check_balanced(prod: WallisProduct) -> None:
    if sum(prod.num_residues) != sum(prod.den_residues):
        raise UnbalancedProduct(
            f"residue sums differ: {sum(prod.num_residues)} != {sum(prod.den_residues)}"
        )


def eq21_eval(prod: WallisProduct, precision_bits: int) -> PrecisionReal:
    """
    Value of a balanced Wallis-type product from the gamma ratio
    prod Γ(v_j/P) / prod Γ(u_j/P); no partial products involved.
    """
    check_balanced(prod)
    bits = working_bits(precision_bits)
    period = prod.period
    with mpmath.workprec(bits + 16):
        total = mpf(0)
        for v in prod.den_residues:
            total += lngamma_mpf(Fraction(v, period), bits + 16)
        for u in prod.num_residues:
            total -= lngamma_mpf(Fraction(u, period), bits + 16)
        value = mpmath.exp(total)
    return PrecisionReal.from_mpf(value, precision_bits)


def eq13_closed_form(K: int) -> ConstExpr:
    """
    (π/K) / sin(π/K), the value of the K-th Wallis generalization.

    K in {2, 3, 4, 6} gives radical forms; other K keep sin(π/K) as a node.
    """
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    if K == 2:
        return Div(Pi(), Integer(2))
    if K == 3:
        return Div(Mul(Integer(2), Pi()), Mul(Integer(3), Sqrt(Integer(3))))
    if K == 4:
        return Div(Pi(), Mul(Integer(2), SQRT2))
    if K == 6:
        return Div(Pi(), Integer(3))
    return Div(Div(Pi(), Integer(K)), SinPi(Fraction(1, K)))


def _reduce_into_unit(x: Fraction) -> tuple[Fraction, Fraction]:
    """Write Γ(x) = c Γ(f) with f in (0, 1]; returns (c, f)."""
    c = Fraction(1)
    while x > 1:
        x -= 1
        c *= x
    return c, x


def _pair_reflections(args: list[Fraction]) -> Optional[tuple[list[Fraction], int]]:
    """
    Split Γ arguments in (0,1] into reflection pairs (x, 1-x), halves, and ones.

    Returns (the smaller member of each pair, number of 1/2 entries), or None
    when something is left over.
    """
    pool = Counter(a for a in args if a != 1)
    halves = pool.pop(Fraction(1, 2), 0)
    pairs: list[Fraction] = []
    for x in sorted(pool):
        while pool[x] > 0:
            partner = 1 - x
            if partner == x or pool[partner] <= 0:
                return None
            pool[x] -= 1
            pool[partner] -= 1
            pairs.append(min(x, partner))
    return pairs, halves


def _sine_node(x: Fraction) -> ConstExpr:
    return sine_radical(x) or SinPi(x)


def reflection_closed_form(prod: WallisProduct) -> Optional[ConstExpr]:
    """
    Closed form of a balanced product via the factorial property and
    reflection Γ(x)Γ(1-x) = π / sin(πx), or None when the gamma arguments
    do not pair up.
    """
    check_balanced(prod)
    scale = Fraction(1)
    den_args, num_args = [], []
    for v in prod.den_residues:
        c, f = _reduce_into_unit(Fraction(v, prod.period))
        scale *= c
        den_args.append(f)
    for u in prod.num_residues:
        c, f = _reduce_into_unit(Fraction(u, prod.period))
        scale /= c
        num_args.append(f)
    top = _pair_reflections(den_args)
    bottom = _pair_reflections(num_args)
    if top is None or bottom is None:
        return None
    top_pairs, top_halves = top
    bottom_pairs, bottom_halves = bottom
    pi_power = Fraction(len(top_pairs) - len(bottom_pairs)) + Fraction(
        top_halves - bottom_halves, 2
    )

    numerator: Optional[ConstExpr] = None
    denominator: Optional[ConstExpr] = None

    def times(acc: Optional[ConstExpr], node: ConstExpr) -> ConstExpr:
        return node if acc is None else Mul(acc, node)

    if scale.numerator != 1:
        numerator = times(numerator, Integer(scale.numerator))
    if pi_power > 0:
        numerator = times(numerator, Pi() if pi_power == 1 else Pow(Pi(), pi_power))
    for x in bottom_pairs:
        numerator = times(numerator, _sine_node(x))
    if scale.denominator != 1:
        denominator = times(denominator, Integer(scale.denominator))
    if pi_power < 0:
        denominator = times(
            denominator, Pi() if pi_power == -1 else Pow(Pi(), -pi_power)
        )
    for x in top_pairs:
        denominator = times(denominator, _sine_node(x))

    if numerator is None:
        numerator = Integer(1)
    return numerator if denominator is None else Div(numerator, denominator)
