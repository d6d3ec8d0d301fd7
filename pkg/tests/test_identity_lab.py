from fractions import Fraction

import pytest
from mpmath import mpf

from prodlab.errors import InvalidClaim, MixedFamilies
from prodlab.gamma_engine import eq21_eval
from prodlab.identity_lab import (
    ClaimSide,
    IdentityClaim,
    Inconclusive,
    NumericEqual,
    ProductRef,
    Refuted,
    StructuralEqual,
    coverage_bound,
    factor_exponent_map,
    is_verified,
    verdict_to_dict,
    verify_catalan_identity,
    verify_identity,
    verify_wallis_identity,
)
from prodlab.product_model import WallisProduct, builtin


def side(*terms, constant=Fraction(1)):
    """side((5, 2), 4) -> paper(5)^2 * paper(4)"""
    parts = []
    for term in terms:
        equation, exponent = term if isinstance(term, tuple) else (term, 1)
        parts.append((ProductRef(f"paper({equation})", builtin(equation)), Fraction(exponent)))
    return ClaimSide(tuple(parts), Fraction(constant))


def claim(lhs, rhs):
    return IdentityClaim(lhs, rhs)


@pytest.mark.parametrize(
    "rhs",
    [side(6, 7), side(8, 9, 7), side(10, 11), side(7, 6), side(11, 10)],
)
def test_wallis_factorizations(rhs):
    verdict = verify_wallis_identity(claim(side(1), rhs))
    assert verdict == StructuralEqual(Fraction(1))


def test_sqrt2_factorization():
    assert verify_wallis_identity(claim(side(3), side(9, 11))) == StructuralEqual(Fraction(1))


@pytest.mark.parametrize(
    "lhs, rhs",
    [
        (side(1), side(6, 6)),
        (side(1), side(6, 8)),
        (side(1), side(8, 9, 6)),
        (side(1), side(10, 9)),
        (side(3), side(9, 10)),
    ],
)
def test_wallis_mutations_refuted(lhs, rhs):
    verdict = verify_wallis_identity(claim(lhs, rhs))
    assert isinstance(verdict, Refuted)
    assert "period 8" in verdict.witness


def test_wallis_integer_exponents_replicate():
    # (3)^2 = (9)^2 (11)^2
    assert verify_wallis_identity(claim(side((3, 2)), side((9, 2), (11, 2)))) == StructuralEqual(Fraction(1))
    # (1) (6)^-1 = (7)
    assert verify_wallis_identity(claim(side(1, (6, -1)), side(7))) == StructuralEqual(Fraction(1))


def test_wallis_fractional_exponent_is_inconclusive():
    verdict = verify_wallis_identity(claim(side((3, Fraction(1, 2))), side(9)))
    assert isinstance(verdict, Inconclusive)


def test_wallis_constants_must_match():
    verdict = verify_wallis_identity(claim(side(1), side(6, 7, constant=Fraction(2))))
    assert isinstance(verdict, Refuted)


def test_wallis_claim_rejects_catalan_products():
    with pytest.raises(MixedFamilies):
        verify_wallis_identity(claim(side(1), side(5)))
    with pytest.raises(MixedFamilies):
        verify_identity(claim(side(1), side(5)))


def test_claim_invariants():
    with pytest.raises(InvalidClaim):
        claim(side((1, 0)), side(6, 7))
    with pytest.raises(InvalidClaim):
        claim(side(1, constant=Fraction(0)), side(6, 7))
    with pytest.raises(InvalidClaim):
        claim(ClaimSide(()), side(6, 7))


def test_factor_exponent_map_examples():
    assert factor_exponent_map(builtin(5), 3) == {
        Fraction(2): Fraction(1, 2),
        Fraction(2, 3): Fraction(1, 4),
        Fraction(4, 3): Fraction(1, 4),
    }
    assert factor_exponent_map(builtin(4), 1) == {Fraction(2): Fraction(1), Fraction(4, 3): Fraction(1, 2)}
    geometric = sum(Fraction(1, 2**k) for k in range(1, 6))
    assert factor_exponent_map(builtin(20), 5) == {Fraction(2): geometric}
    with pytest.raises(ValueError):
        factor_exponent_map(builtin(5), 0)


def test_coverage_bound():
    # position 16 of builtin(5) is 18/17, position 17 is 18/19
    assert coverage_bound([builtin(5)], 16) == 17
    assert coverage_bound([builtin(20)], 16) is None


@pytest.mark.parametrize("window", [16, 64, 256])
def test_square_equals_product_structurally(window):
    verdict = verify_catalan_identity(claim(side((5, 2)), side(4, 15)), T=window)
    assert verdict == StructuralEqual(Fraction(1))


@pytest.mark.parametrize("window", [16, 64, 256])
def test_square_with_constant_absorbs_residual(window):
    rhs = side(16, 17, constant=Fraction(1, 2))
    verdict = verify_catalan_identity(claim(side((5, 2)), rhs), T=window)
    assert verdict == StructuralEqual(Fraction(2))
    assert verdict.describe() == "structural, residual 2"


@pytest.mark.parametrize("rhs", [side(15, (20, 2)), side(5, 20)])
def test_telescoping_identities_verify_numerically(rhs):
    verdict = verify_catalan_identity(claim(side(4), rhs))
    assert isinstance(verdict, NumericEqual)
    assert verdict_to_dict(verdict)["verdict"] == "numeric"


@pytest.mark.parametrize(
    "lhs, rhs",
    [
        (side((5, 2)), side(4, 16)),
        (side((5, 2)), side(16, 17, constant=Fraction(1, 3))),
        (side(4), side(15, (20, 3))),
        (side(4), side(5, (20, 2))),
    ],
)
def test_catalan_mutations_refuted(lhs, rhs):
    assert isinstance(verify_catalan_identity(claim(lhs, rhs)), Refuted)


def test_catalan_window_precondition():
    with pytest.raises(ValueError):
        verify_catalan_identity(claim(side((5, 2)), side(4, 15)), T=8)


def test_dispatch():
    assert verify_identity(claim(side(1), side(6, 7))) == StructuralEqual(Fraction(1))
    assert verify_identity(claim(side((5, 2)), side(4, 15))) == StructuralEqual(Fraction(1))


def test_wallis_boundary_moves_into_constant():
    # 2 * (4/3)(2/3)(6/5)(4/5)... = pi/2
    shifted = ProductRef("shifted", WallisProduct(2, (4, 2), (3, 3)))
    rhs = ClaimSide(((shifted, Fraction(1)),), Fraction(2))
    verdict = verify_wallis_identity(claim(side(1), rhs))
    assert verdict == StructuralEqual(Fraction(1, 2))
    assert is_verified(verdict)

    unscaled = ClaimSide(((shifted, Fraction(1)),))
    refuted = verify_wallis_identity(claim(side(1), unscaled))
    assert isinstance(refuted, Refuted)
    assert "constants differ" in refuted.witness


def test_wallis_boundary_claim_agrees_numerically():
    shifted = WallisProduct(2, (4, 2), (3, 3))
    lhs = eq21_eval(builtin(1), 128).value
    rhs = 2 * eq21_eval(shifted, 128).value
    assert abs(lhs - rhs) < mpf(2) ** -120
