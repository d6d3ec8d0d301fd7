"""
numerics.py - exact rationals, precision-tagged reals, and constant expressions.

Rationals are Python's Fraction (always reduced, denominator > 0).
Reals are mpmath numbers tagged with the precision they were produced at;
every producing operation computes at precision + GUARD_BITS and rounds once
at the end, so the stored value meets

    |stored - true| <= 2^(-p+2) * max(1, |true|)

ConstExpr trees hold closed forms such as pi/(4*sqrt(2-sqrt(2))); they are
compared by evaluation, never by structure.

Note: mpmath keeps its working precision in a process-wide context, so
evaluation is serialized per process. Values themselves are immutable.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

# import from external packages
import mpmath
from mpmath import mpf

# import from local modules
from prodlab.errors import DivisionByZero, NegativeSqrt
from utils.utils_logger import logger

#####################################
# Precision Policy
#####################################

Rational = Fraction

GUARD_BITS = 32
MIN_PRECISION_BITS = 8
LOG10_2 = math.log10(2)


def working_bits(precision_bits: int) -> int:
    """Internal precision used for a result requested at `precision_bits`."""
    return precision_bits + GUARD_BITS


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce an int, a '3/4' or '1e-5' string, or a Fraction to a Fraction."""
    return value if isinstance(value, Fraction) else Fraction(value)


def rational_to_mpf(value: Fraction) -> mpf:
    """Round a Fraction to the current mpmath precision."""
    return mpf(value.numerator) / value.denominator


@dataclass(frozen=True)
class PrecisionReal:
    """An mpmath real together with the precision its accuracy contract refers to."""

    value: mpf
    precision_bits: int

    @classmethod
    def from_mpf(cls, value: mpf, precision_bits: int) -> PrecisionReal:
        """Round a working-precision value down to `precision_bits`."""
        with mpmath.workprec(precision_bits):
            rounded = mpf(value)
        return cls(rounded, precision_bits)

    @classmethod
    def from_rational(cls, value: Fraction, precision_bits: int) -> PrecisionReal:
        with mpmath.workprec(precision_bits):
            rounded = rational_to_mpf(value)
        return cls(rounded, precision_bits)

    def slack(self) -> mpf:
        """Accuracy slack 2^(-p+2) * max(1, |value|) promised by the contract."""
        with mpmath.workprec(64):
            return mpmath.ldexp(mpmath.mpf(1), -self.precision_bits + 2) * max(
                mpf(1), abs(self.value)
            )

    def decimal_digits(self) -> int:
        """Digits that can be printed without claiming more than the contract."""
        return max(1, int(self.precision_bits * LOG10_2) - 2)

    def to_decimal(self) -> str:
        return mpmath.nstr(
            self.value,
            self.decimal_digits(),
            min_fixed=-(10**9),
            max_fixed=10**9,
        )

    def __float__(self) -> float:
        return float(self.value)


#####################################
# Cached Constants
#####################################

_constant_cache: dict[tuple[str, int], mpf] = {}
_constant_lock = threading.Lock()


def _cached_constant(name: str, bits: int) -> mpf:
    key = (name, bits)
    cached = _constant_cache.get(key)
    if cached is not None:
        return cached
    with _constant_lock:
        cached = _constant_cache.get(key)
        if cached is None:
            with mpmath.workprec(bits + GUARD_BITS):
                cached = +(mpmath.pi if name == "pi" else mpmath.e)
            _constant_cache[key] = cached
            logger.debug(f"Cached {name} at {bits} bits.")
    return cached


def pi_mpf(bits: int) -> mpf:
    """pi carried to at least bits + GUARD_BITS bits, computed once per level."""
    return _cached_constant("pi", bits)


def e_mpf(bits: int) -> mpf:
    """e carried to at least bits + GUARD_BITS bits, computed once per level."""
    return _cached_constant("e", bits)


def sin_pi_mpf(x: Fraction, bits: int) -> mpf:
    """
    sin(pi*x) at `bits` of working precision.

    The argument is reduced exactly (mod 2, symmetry about 1/2, and the
    sin/cos swap above 1/4) so that the power series only ever sees
    t = pi*s with s in [0, 1/4].
    """
    r = x - 2 * math.floor(x / 2)
    sign = 1
    if r >= 1:
        r -= 1
        sign = -1
    if r > Fraction(1, 2):
        r = 1 - r
    if r == 0:
        return mpf(0)
    if r == Fraction(1, 2):
        return mpf(sign)

    use_cosine = r > Fraction(1, 4)
    s = Fraction(1, 2) - r if use_cosine else r
    with mpmath.workprec(bits + 8):
        t = pi_mpf(bits) * rational_to_mpf(s)
        t2 = t * t
        eps = mpmath.ldexp(mpf(1), -(bits + 8))
        if use_cosine:
            term, total, k = mpf(1), mpf(1), 0
        else:
            term, total, k = t, t, 1
        while abs(term) > eps:
            term = -term * t2 / ((k + 1) * (k + 2))
            total += term
            k += 2
        return sign * total


#####################################
# Constant Expressions
#####################################

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_POW = 3
_PREC_ATOM = 4


class ConstExpr:
    """Base class for closed-form expression nodes."""

    precedence = _PREC_ATOM

    def render(self) -> str:
        raise NotImplementedError

    def evaluate(self, bits: int) -> mpf:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Pi(ConstExpr):
    def render(self) -> str:
        return "pi"

    def evaluate(self, bits: int) -> mpf:
        return +pi_mpf(bits)


@dataclass(frozen=True)
class E(ConstExpr):
    def render(self) -> str:
        return "e"

    def evaluate(self, bits: int) -> mpf:
        return +e_mpf(bits)


@dataclass(frozen=True)
class Integer(ConstExpr):
    n: int

    @property
    def precedence(self) -> int:
        return _PREC_ATOM if self.n >= 0 else _PREC_ADD

    def render(self) -> str:
        return str(self.n)

    def evaluate(self, bits: int) -> mpf:
        return mpf(self.n)


@dataclass(frozen=True)
class Rat(ConstExpr):
    q: Fraction

    @property
    def precedence(self) -> int:
        if self.q.denominator == 1:
            return _PREC_ATOM if self.q >= 0 else _PREC_ADD
        return _PREC_MUL if self.q >= 0 else _PREC_ADD

    def render(self) -> str:
        return str(self.q)

    def evaluate(self, bits: int) -> mpf:
        return rational_to_mpf(self.q)


def _wrap(node: ConstExpr, needs_parens: bool) -> str:
    text = node.render()
    return f"({text})" if needs_parens else text


@dataclass(frozen=True)
class _Binary(ConstExpr):
    left: ConstExpr
    right: ConstExpr

    symbol = "?"
    commutative = True

    def render(self) -> str:
        op = self.precedence
        left = _wrap(self.left, self.left.precedence < op)
        right_prec = self.right.precedence
        right_parens = right_prec < op or (right_prec == op and not self.commutative)
        return f"{left}{self.symbol}{_wrap(self.right, right_parens)}"


@dataclass(frozen=True)
class Add(_Binary):
    precedence = _PREC_ADD
    symbol = "+"

    def evaluate(self, bits: int) -> mpf:
        return self.left.evaluate(bits) + self.right.evaluate(bits)


@dataclass(frozen=True)
class Sub(_Binary):
    precedence = _PREC_ADD
    symbol = "-"
    commutative = False

    def evaluate(self, bits: int) -> mpf:
        return self.left.evaluate(bits) - self.right.evaluate(bits)


@dataclass(frozen=True)
class Mul(_Binary):
    precedence = _PREC_MUL
    symbol = "*"

    def evaluate(self, bits: int) -> mpf:
        return self.left.evaluate(bits) * self.right.evaluate(bits)


@dataclass(frozen=True)
class Div(_Binary):
    precedence = _PREC_MUL
    symbol = "/"
    commutative = False

    def evaluate(self, bits: int) -> mpf:
        denominator = self.right.evaluate(bits)
        if denominator == 0:
            raise DivisionByZero(f"division by zero in {self.render()}")
        return self.left.evaluate(bits) / denominator


@dataclass(frozen=True)
class Sqrt(ConstExpr):
    arg: ConstExpr

    def render(self) -> str:
        return f"sqrt({self.arg.render()})"

    def evaluate(self, bits: int) -> mpf:
        value = self.arg.evaluate(bits)
        if value < 0:
            raise NegativeSqrt(f"negative argument in {self.render()}")
        return mpmath.sqrt(value)


@dataclass(frozen=True)
class Pow(ConstExpr):
    base: ConstExpr
    exponent: Fraction

    precedence = _PREC_POW

    def render(self) -> str:
        base = _wrap(self.base, self.base.precedence < _PREC_ATOM)
        return f"{base}^({self.exponent})"

    def evaluate(self, bits: int) -> mpf:
        x = self.exponent
        if isinstance(self.base, E):
            return mpmath.exp(rational_to_mpf(x))
        b = self.base.evaluate(bits)
        if x.denominator == 1:
            if b == 0 and x < 0:
                raise DivisionByZero(f"zero to a negative power in {self.render()}")
            return b ** int(x)
        if b == 0:
            if x < 0:
                raise DivisionByZero(f"zero to a negative power in {self.render()}")
            return mpf(0)
        if b < 0:
            if x.denominator % 2 == 0:
                raise NegativeSqrt(f"even root of a negative base in {self.render()}")
            sign = -1 if x.numerator % 2 else 1
            return sign * mpmath.exp(rational_to_mpf(x) * mpmath.log(-b))
        return mpmath.exp(rational_to_mpf(x) * mpmath.log(b))


@dataclass(frozen=True)
class SinPi(ConstExpr):
    """sin(pi*x) for rational x, left unevaluated when no radical is known."""

    x: Fraction

    def render(self) -> str:
        if self.x.numerator == 1:
            return f"sin(pi/{self.x.denominator})"
        return f"sin(pi*{self.x})"

    def evaluate(self, bits: int) -> mpf:
        return sin_pi_mpf(self.x, bits)


def const_eval(expr: ConstExpr, precision_bits: int) -> PrecisionReal:
    """Evaluate a closed form under the PrecisionReal contract."""
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision must be >= {MIN_PRECISION_BITS} bits")
    bits = working_bits(precision_bits)
    with mpmath.workprec(bits):
        value = expr.evaluate(bits)
    return PrecisionReal.from_mpf(value, precision_bits)


#####################################
# Comparison
#####################################


class Comparison(enum.Enum):
    EQUAL = "equal"
    DISTINCT = "distinct"
    INCONCLUSIVE = "inconclusive"


Tolerance = Union[PrecisionReal, Fraction, int, str]


def tolerance_to_mpf(tol: Tolerance) -> mpf:
    if isinstance(tol, PrecisionReal):
        return tol.value
    return rational_to_mpf(as_rational(tol))


def prec_compare(a: PrecisionReal, b: PrecisionReal, tol: Tolerance) -> Comparison:
    """
    Compare two reals against a tolerance, honoring both accuracy slacks.

    Equal when |a-b| <= tol - slack, Distinct when |a-b| > tol + slack,
    Inconclusive in between.
    """
    bits = max(a.precision_bits, b.precision_bits) + GUARD_BITS
    with mpmath.workprec(bits):
        diff = abs(a.value - b.value)
        slack = a.slack() + b.slack()
        limit = tolerance_to_mpf(tol)
        if diff <= limit - slack:
            return Comparison.EQUAL
        if diff > limit + slack:
            return Comparison.DISTINCT
    return Comparison.INCONCLUSIVE
