"""
conjecture_lab.py - explore the limits of pippenger_general(K).

For K = 2 and K = 3 the limits are known (e/2 and e^(2/3)/sqrt(3)).
For larger K this module estimates the limit, searches for a closed form
e^x * K^y * r, and fits a trend to the recognized exponents. Everything it
reports for K >= 4 is conjectural.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional

# import from external packages
import mpmath
from mpmath import mpf

# import from local modules
from prodlab.errors import BudgetExceeded
from prodlab.evaluator import EvalReport, catalan_block_partial, catalan_limit
from prodlab.numerics import (
    E,
    ConstExpr,
    Integer,
    Mul,
    Pow,
    PrecisionReal,
    Rat,
    rational_to_mpf,
)
from prodlab.product_model import builtin_value, pippenger_general
from utils.utils_logger import logger

#####################################
# Limit Estimates
#####################################

DEFAULT_FACTOR_BUDGET = 10**7
REFINED_TOLERANCE = Fraction(1, 10**45)
KNOWN_LIMITS = {2: 5, 3: 18}


def pippenger_factor_count(K: int, n_blocks: int) -> int:
    """Factors enumerated by the first n_blocks blocks: 1 + sum 2(K-1)K^(k-2)."""
    if n_blocks < 1:
        return 0
    return 2 * K ** (n_blocks - 1) - 1


def estimate_general_limit(
    K: int, n_blocks: int, precision_bits: int, budget: int = DEFAULT_FACTOR_BUDGET
) -> EvalReport:
    """pippenger_general(K) truncated after n_blocks blocks, with its tail bound."""
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    count = pippenger_factor_count(K, n_blocks)
    if count > budget:
        logger.error(f"ERROR: K={K} with {n_blocks} blocks needs {count} factors (budget {budget}).")
        raise BudgetExceeded(f"K={K}, {n_blocks} blocks: {count} factors exceed budget {budget}")
    logger.info(f"Estimating pippenger_general({K}) over {n_blocks} blocks ({count} factors).")
    return catalan_block_partial(pippenger_general(K), n_blocks, precision_bits)


#####################################
# Constant Recognition
#####################################

MATCH_THRESHOLD = mpf("1e-30")
EXPONENT_LIMIT = 4
_FLOAT_WINDOW = 1e-9


@dataclass(frozen=True)
class RecognitionCandidate:
    """value ~ e^x * K^y * r"""

    x: Fraction
    y: Fraction
    r: Fraction
    K: int
    residual: PrecisionReal

    @property
    def complexity(self) -> int:
        return (
            self.x.denominator
            + self.y.denominator
            + max(abs(self.r.numerator), self.r.denominator)
        )

    @property
    def expr(self) -> ConstExpr:
        parts: list[ConstExpr] = []
        if self.x == 1:
            parts.append(E())
        elif self.x != 0:
            parts.append(Pow(E(), self.x))
        if self.y != 0:
            parts.append(Pow(Integer(self.K), self.y))
        if self.r != 1:
            parts.append(Rat(self.r))
        if not parts:
            return Integer(1)
        expr = parts[0]
        for part in parts[1:]:
            expr = Mul(expr, part)
        return expr

    def sort_key(self) -> tuple:
        return (self.complexity, self.residual.value, self.x, self.y, self.r)

    def to_dict(self) -> dict[str, Any]:
        return {
            "expr": self.expr.render(),
            "x": str(self.x),
            "y": str(self.y),
            "r": str(self.r),
            "complexity": self.complexity,
            "residual": mpmath.nstr(self.residual.value, 3),
        }


def _exponents(q_max: int) -> list[Fraction]:
    values = {
        Fraction(p, q)
        for q in range(1, q_max + 1)
        for p in range(-EXPONENT_LIMIT * q, EXPONENT_LIMIT * q + 1)
    }
    return sorted(values)


def _rationals(r_max: int) -> list[Fraction]:
    return sorted({Fraction(a, b) for a in range(1, r_max + 1) for b in range(1, r_max + 1)})


def recognize_constant(
    value: PrecisionReal, K: int, q_max: int = 12, r_max: int = 64
) -> list[RecognitionCandidate]:
    """
    Every (x, y, r) with |ln value - x - y ln K - ln r| < 1e-30.

    A float pass narrows r for each (x, y); survivors are confirmed at the
    value's own precision. The result is ordered by complexity, residual,
    then (x, y, r).
    """
    if q_max < 1 or r_max < 1:
        raise ValueError("q_max and r_max must be >= 1")
    if value.value <= 0:
        return []
    exponents = _exponents(q_max)
    rationals = _rationals(r_max)
    by_log = sorted((math.log(r), r) for r in rationals)
    float_logs = [entry[0] for entry in by_log]

    bits = value.precision_bits + 16
    found: list[RecognitionCandidate] = []
    with mpmath.workprec(bits):
        ln_value = mpmath.log(value.value)
        ln_K = mpmath.log(K)
        ln_value_f = float(ln_value)
        ln_K_f = float(ln_K)
        for x in exponents:
            rest_x = ln_value_f - float(x)
            for y in exponents:
                target = rest_x - float(y) * ln_K_f
                lo = bisect.bisect_left(float_logs, target - _FLOAT_WINDOW)
                hi = bisect.bisect_right(float_logs, target + _FLOAT_WINDOW)
                for _, r in by_log[lo:hi]:
                    residual = abs(
                        ln_value
                        - rational_to_mpf(x)
                        - rational_to_mpf(y) * ln_K
                        - mpmath.log(rational_to_mpf(r))
                    )
                    if residual < MATCH_THRESHOLD:
                        found.append(
                            RecognitionCandidate(
                                x, y, r, K, PrecisionReal.from_mpf(residual, 64)
                            )
                        )
    found.sort(key=RecognitionCandidate.sort_key)
    logger.info(f"K={K}: {len(found)} recognition candidates.")
    return found


#####################################
# Trend Fit
#####################################

TrendForm = tuple[str, Callable[[int], Fraction]]

TREND_FORMS: tuple[TrendForm, ...] = (
    ("c", lambda K: Fraction(1)),
    ("c/K", lambda K: Fraction(1, K)),
    ("c/(K-1)", lambda K: Fraction(1, K - 1)),
    ("c/K^2", lambda K: Fraction(1, K * K)),
    ("c/(K(K-1))", lambda K: Fraction(1, K * (K - 1))),
)


def _fit_one(points: list[tuple[int, Fraction]]) -> Optional[str]:
    for name, shape in TREND_FORMS:
        coefficients = {value / shape(K) for K, value in points}
        if len(coefficients) == 1:
            c = coefficients.pop()
            return name.replace("c", f"({c})", 1) if c.denominator != 1 else name.replace(
                "c", str(c), 1
            )
    return None


def fit_trend(rows: list[dict[str, Any]]) -> Optional[dict[str, Any]]:
    """
    Fit x(K) and y(K) of the top candidates to one of a few simple forms.

    Needs at least two recognized rows. The first form whose coefficient is
    the same for every row wins.
    """
    points = [
        (row["K"], Fraction(row["candidates"][0]["x"]), Fraction(row["candidates"][0]["y"]))
        for row in rows
        if row["candidates"]
    ]
    if len(points) < 2:
        return None
    x_form = _fit_one([(K, x) for K, x, _ in points])
    y_form = _fit_one([(K, y) for K, _, y in points])
    return {
        "x": x_form,
        "y": y_form,
        "rows_used": [K for K, _, _ in points],
        "conjectural": True,
    }


#####################################
# Report
#####################################


def conjecture_row(
    K: int,
    n_blocks: int,
    precision_bits: int,
    budget: int = DEFAULT_FACTOR_BUDGET,
    top: int = 3,
) -> dict[str, Any]:
    estimate = estimate_general_limit(K, n_blocks, precision_bits, budget)
    refined = catalan_limit(pippenger_general(K), REFINED_TOLERANCE, precision_bits)
    candidates = recognize_constant(refined.value, K)
    row: dict[str, Any] = {
        "K": K,
        "blocks": n_blocks,
        "value_decimal": estimate.value.to_decimal(),
        "tail_bound": mpmath.nstr(estimate.log_tail_bound.value, 6),
        "error_bound": mpmath.nstr(estimate.error_bound.value, 6),
        "refined_decimal": mpmath.nstr(refined.value.value, 50),
        "candidates": [c.to_dict() for c in candidates[:top]],
        "conjectural": K not in KNOWN_LIMITS,
    }
    if K in KNOWN_LIMITS:
        row["closed_form"] = builtin_value(KNOWN_LIMITS[K]).render()
    return row


def conjecture_report(
    K_range: list[int],
    precision_bits: int,
    n_blocks: int = 10,
    budget: int = DEFAULT_FACTOR_BUDGET,
) -> dict[str, Any]:
    """Rows per K plus a fitted exponent trend; the report as a whole is conjectural."""
    for K in K_range:
        count = pippenger_factor_count(K, n_blocks)
        if count > budget:
            raise BudgetExceeded(f"K={K}, {n_blocks} blocks: {count} factors exceed budget {budget}")
    rows = [conjecture_row(K, n_blocks, precision_bits, budget) for K in K_range]
    return {
        "conjectural": True,
        "precision_bits": precision_bits,
        "rows": rows,
        "trend": fit_trend(rows),
    }
