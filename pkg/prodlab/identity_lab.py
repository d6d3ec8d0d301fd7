"""
identity_lab.py - verify factorization identities between products.

Wallis-type claims are decided structurally: both sides are rewritten at a
common period and their residue multisets and boundary corrections compared.

Catalan-type claims first compare exponent-weighted factor maps over a
window of stream positions. When the maps do not agree up to a rational
constant, the claim falls back to a numeric comparison of the limits.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Union

# import from external packages
import mpmath
from mpmath import mpf

# import from local modules
from prodlab.errors import InvalidClaim, MixedFamilies, NumericError
from prodlab.evaluator import catalan_limit
from prodlab.numerics import GUARD_BITS, rational_to_mpf, working_bits
from prodlab.product_model import (
    CanonicalWallisForm,
    CatalanProduct,
    ConstStream,
    WallisProduct,
    disjoint_union,
)
from utils.utils_logger import logger

#####################################
# Claims and Verdicts
#####################################

Product = Union[WallisProduct, CatalanProduct]

DEFAULT_WINDOW = 256
MIN_WINDOW = 16
DEFAULT_IDENTITY_TOLERANCE = Fraction(1, 10**10)


@dataclass(frozen=True)
class ProductRef:
    """A product together with the text it was written as (e.g. 'paper(5)')."""

    label: str
    product: Product


@dataclass(frozen=True)
class ClaimSide:
    terms: tuple[tuple[ProductRef, Fraction], ...]
    constant: Fraction = Fraction(1)

    def products(self) -> list[Product]:
        return [ref.product for ref, _ in self.terms]


@dataclass(frozen=True)
class IdentityClaim:
    """lhs_const * prod lhs_i^e_i = rhs_const * prod rhs_j^f_j"""

    lhs: ClaimSide
    rhs: ClaimSide

    def __post_init__(self) -> None:
        for name, side in (("lhs", self.lhs), ("rhs", self.rhs)):
            if not side.terms:
                raise InvalidClaim(f"{name} names no product")
            if side.constant <= 0:
                raise InvalidClaim(f"{name} constant must be positive, got {side.constant}")
            if any(e == 0 for _, e in side.terms):
                raise InvalidClaim(f"{name} has a zero exponent")

    def products(self) -> list[Product]:
        return self.lhs.products() + self.rhs.products()


@dataclass(frozen=True)
class StructuralEqual:
    residual: Fraction

    kind = "structural"

    def describe(self) -> str:
        if self.residual == 1:
            return "structural"
        return f"structural, residual {self.residual}"


@dataclass(frozen=True)
class NumericEqual:
    tolerance: Fraction
    lhs_value: str
    rhs_value: str

    kind = "numeric"

    def describe(self) -> str:
        return f"numeric, within {float(self.tolerance):g}"


@dataclass(frozen=True)
class Refuted:
    witness: str

    kind = "refuted"

    def describe(self) -> str:
        return f"refuted: {self.witness}"


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    kind = "inconclusive"

    def describe(self) -> str:
        return f"inconclusive: {self.reason}"


Verdict = Union[StructuralEqual, NumericEqual, Refuted, Inconclusive]


def verdict_to_dict(verdict: Verdict) -> dict[str, Any]:
    out: dict[str, Any] = {"verdict": verdict.kind, "detail": verdict.describe()}
    if isinstance(verdict, StructuralEqual):
        out["residual"] = str(verdict.residual)
    elif isinstance(verdict, NumericEqual):
        out["tolerance"] = f"{float(verdict.tolerance):g}"
        out["lhs_value"] = verdict.lhs_value
        out["rhs_value"] = verdict.rhs_value
    elif isinstance(verdict, Refuted):
        out["witness"] = verdict.witness
    else:
        out["reason"] = verdict.reason
    return out


def is_verified(verdict: Verdict) -> bool:
    return isinstance(verdict, (StructuralEqual, NumericEqual))


#####################################
# Wallis-type Claims
#####################################


def _powered(prod: WallisProduct, exponent: int) -> list[WallisProduct]:
    """prod^exponent as copies of prod (or of its reciprocal for negative exponents)."""
    if exponent < 0:
        prod = WallisProduct(prod.period, prod.den_residues, prod.num_residues)
    return [prod] * abs(exponent)


def _expand_side(side: ClaimSide) -> Optional[list[WallisProduct]]:
    expanded: list[WallisProduct] = []
    for ref, exponent in side.terms:
        if exponent.denominator != 1:
            return None
        expanded += _powered(ref.product, int(exponent))
    return expanded


def _cancelled(form: CanonicalWallisForm) -> tuple[Counter, Counter, Counter]:
    """Residue multisets with residues common to both sides removed, plus the boundary."""
    num = Counter(form.num_residues)
    den = Counter(form.den_residues)
    common = num & den
    return num - common, den - common, Counter(dict(form.boundary))


def _first_difference(left: Counter, right: Counter) -> Optional[int]:
    keys = sorted(set(left) | set(right))
    for key in keys:
        if left[key] != right[key]:
            return key
    return None


def _boundary_value(boundary: Counter) -> Fraction:
    """Rational factor contributed by the boundary: prod of m^-count."""
    value = Fraction(1)
    for m, count in boundary.items():
        value *= Fraction(m) ** -count
    return value


def verify_wallis_identity(claim: IdentityClaim) -> Verdict:
    """
    Structural check at Q = lcm of all periods.

    Residues shared by numerator and denominator cancel before comparison;
    the first residue on which the sides disagree is reported as the witness.
    Boundary integers only scale a side by a rational, so they fold into the
    residual, which must balance the claim's constants.
    """
    products = claim.products()
    if any(isinstance(p, CatalanProduct) for p in products):
        raise MixedFamilies("a Wallis-type claim references a Catalan-type product")
    lhs = _expand_side(claim.lhs)
    rhs = _expand_side(claim.rhs)
    if lhs is None or rhs is None:
        return Inconclusive("non-integer exponent on a Wallis-type product")

    period = math.lcm(*(p.period for p in products))
    left = _cancelled(disjoint_union(lhs, period))
    right = _cancelled(disjoint_union(rhs, period))
    logger.info(f"Comparing Wallis-type factorizations at period {period}.")

    for label, a, b in zip(("numerator residue", "denominator residue"), left[:2], right[:2]):
        key = _first_difference(a, b)
        if key is not None:
            witness = f"{label} {key} at period {period}: lhs {a[key]}, rhs {b[key]}"
            logger.info(f"Wallis claim refuted: {witness}")
            return Refuted(witness)
    residual = _boundary_value(right[2]) / _boundary_value(left[2])
    if residual * claim.rhs.constant != claim.lhs.constant:
        witness = (
            f"constants differ: lhs {claim.lhs.constant}, "
            f"rhs {claim.rhs.constant} with boundary residual {residual}"
        )
        logger.info(f"Wallis claim refuted: {witness}")
        return Refuted(witness)
    return StructuralEqual(residual)


#####################################
# Catalan-type Factor Maps
#####################################


def _position_exponents(prod: CatalanProduct, T: int):
    """Yield (position, block exponent) for stream positions 0 .. T-1."""
    k = 1
    while prod.has_block(k):
        start = prod.schedule.start(k)
        if start >= T:
            return
        exponent = prod.schedule.exponent(k)
        for t in range(start, min(start + prod.schedule.size(k), T)):
            yield t, exponent
        k += 1


def _exponent_map(prod: CatalanProduct, T: int, bound: Optional[int]) -> dict[Fraction, Fraction]:
    weights: dict[Fraction, Fraction] = {}
    for f, e in prod.prefix:
        weights[f] = weights.get(f, Fraction(0)) + e
    for t, e in _position_exponents(prod, T):
        a, b = prod.stream.raw(t)
        if bound is not None and max(a, b) >= bound and not isinstance(prod.stream, ConstStream):
            continue
        f = Fraction(a, b)
        weights[f] = weights.get(f, Fraction(0)) + e
    return weights


def factor_exponent_map(prod: CatalanProduct, T: int) -> dict[Fraction, Fraction]:
    """Total exponent of each distinct factor among the prefix and the first T stream positions."""
    if T < 1:
        raise ValueError(f"window must be >= 1 position, got {T}")
    return _exponent_map(prod, T, None)


def coverage_bound(products: list[CatalanProduct], T: int) -> Optional[int]:
    """
    Smallest integer that may still occur in some stream beyond position T.

    Factors whose numerator and denominator both stay below it have been
    enumerated completely by every stream. Constant streams never limit it.
    """
    bound: Optional[int] = None
    for prod in products:
        stream = prod.stream
        if isinstance(stream, ConstStream):
            continue
        row = min(min(stream.raw(t)) for t in range(T, T + len(stream.pairs)))
        bound = row if bound is None else min(bound, row)
    return bound


def _side_map(side: ClaimSide, T: int, bound: Optional[int]) -> dict[Fraction, Fraction]:
    weights: dict[Fraction, Fraction] = {}
    for ref, exponent in side.terms:
        for f, e in _exponent_map(ref.product, T, bound).items():
            weights[f] = weights.get(f, Fraction(0)) + exponent * e
    return weights


def _difference(lhs: dict, rhs: dict) -> dict[Fraction, Fraction]:
    keys = set(lhs) | set(rhs)
    diff = {f: rhs.get(f, Fraction(0)) - lhs.get(f, Fraction(0)) for f in keys}
    return {f: e for f, e in diff.items() if e != 0 and f != 1}


def _residual(diff: dict[Fraction, Fraction]) -> Optional[Fraction]:
    """prod f^e over the difference map when every exponent is an integer."""
    residual = Fraction(1)
    for f, e in diff.items():
        if e.denominator != 1:
            return None
        residual *= f ** int(e)
    return residual


#####################################
# Catalan-type Claims
#####################################


def _side_log(side: ClaimSide, tol: Fraction, precision_bits: int) -> tuple[mpf, mpf]:
    """ln of one side and a bound on its absolute error."""
    weight = sum(abs(e) for _, e in side.terms)
    per_product = tol / (10 * weight)
    bits = working_bits(precision_bits)
    with mpmath.workprec(bits):
        total = mpmath.log(rational_to_mpf(side.constant))
        error = mpf(0)
        for ref, exponent in side.terms:
            report = catalan_limit(ref.product, per_product, precision_bits)
            e = rational_to_mpf(exponent)
            total += e * mpmath.log(report.value.value)
            error += abs(e) * (report.log_tail_bound.value + report.value.slack())
        return total, error


def _numeric_verdict(claim: IdentityClaim, tol: Fraction, precision_bits: int) -> Verdict:
    logger.info(f"Falling back to numeric comparison at tolerance {float(tol):g}.")
    try:
        lhs_log, lhs_err = _side_log(claim.lhs, tol, precision_bits)
        rhs_log, rhs_err = _side_log(claim.rhs, tol, precision_bits)
    except NumericError as e:
        return Inconclusive(f"numeric evaluation failed: {e}")

    with mpmath.workprec(precision_bits + GUARD_BITS):
        lhs_value = mpmath.exp(lhs_log)
        rhs_value = mpmath.exp(rhs_log)
        diff = abs(lhs_value - rhs_value)
        spread = lhs_value * mpmath.expm1(lhs_err) + rhs_value * mpmath.expm1(rhs_err)
        limit = rational_to_mpf(tol)
        digits = max(15, int(math.log10(1 / tol)) + 5)
        left, right = mpmath.nstr(lhs_value, digits), mpmath.nstr(rhs_value, digits)
        if diff <= limit - spread:
            return NumericEqual(tol, left, right)
        if diff > limit + spread:
            return Refuted(f"lhs {left} differs from rhs {right} by {mpmath.nstr(diff, 5)}")
    return Inconclusive(f"difference {mpmath.nstr(diff, 5)} within error of tolerance")


def verify_catalan_identity(
    claim: IdentityClaim,
    T: int = DEFAULT_WINDOW,
    tol: Fraction = DEFAULT_IDENTITY_TOLERANCE,
    precision_bits: int = 128,
) -> Verdict:
    """
    Structural window comparison, then numeric fallback.

    StructuralEqual when the windowed factor maps differ by integer exponents
    only and the resulting rational residual is absorbed by the constants.
    """
    if T < MIN_WINDOW:
        raise ValueError(f"window must be >= {MIN_WINDOW} positions, got {T}")
    products = claim.products()
    if any(isinstance(p, WallisProduct) for p in products):
        raise MixedFamilies("a Catalan-type claim references a Wallis-type product")

    bound = coverage_bound(products, T)
    diff = _difference(_side_map(claim.lhs, T, bound), _side_map(claim.rhs, T, bound))
    logger.info(f"Catalan window of {T} positions, coverage bound {bound}, {len(diff)} differing factors.")
    residual = _residual(diff)
    if residual is not None and claim.lhs.constant == claim.rhs.constant * residual:
        return StructuralEqual(residual)
    return _numeric_verdict(claim, Fraction(tol), precision_bits)


def verify_identity(
    claim: IdentityClaim,
    T: int = DEFAULT_WINDOW,
    tol: Fraction = DEFAULT_IDENTITY_TOLERANCE,
    precision_bits: int = 128,
) -> Verdict:
    """Route a claim to the verifier for its product family."""
    products = claim.products()
    if all(isinstance(p, WallisProduct) for p in products):
        return verify_wallis_identity(claim)
    if all(isinstance(p, CatalanProduct) for p in products):
        return verify_catalan_identity(claim, T, tol, precision_bits)
    logger.error("ERROR: claim mixes Wallis-type and Catalan-type products.")
    raise MixedFamilies("claim mixes Wallis-type and Catalan-type products")
