"""
errors.py - exception hierarchy for prodlab.

Numeric failures (exit code 3 on the command line) derive from NumericError.
Problems with the shape of a product or claim derive from ModelError.
The DSL's ParseError lives in prodlab.product_dsl and also derives from
ProdlabError.
"""


class ProdlabError(Exception):
    """Base class for every error raised by prodlab."""


#####################################
# Numeric Errors
#####################################


class NumericError(ProdlabError):
    """A computation could not deliver its accuracy contract."""


class DivisionByZero(NumericError):
    """A ConstExpr divided by a subexpression that evaluates to 0."""


class NegativeSqrt(NumericError):
    """A ConstExpr took an even root of a negative value."""


class NonpositiveArgument(NumericError):
    """lnΓ was asked for x <= 0."""


class InsufficientTerms(NumericError):
    """Richardson extrapolation was given too few periods or bad levels."""


class NoConvergence(NumericError):
    """The Catalan tail bound stopped decreasing or never reached the tolerance."""


class BudgetExceeded(NumericError):
    """A request would enumerate more factors than the configured budget."""


#####################################
# Model Errors
#####################################


class ModelError(ProdlabError):
    """A product or claim is not shaped the way the operation needs."""


class InvalidProduct(ModelError):
    """Constructor invariant violated (residues, schedule, prefix)."""


class UnknownBuiltin(ModelError):
    """No builtin product carries the requested equation number."""


class UnbalancedProduct(ModelError):
    """Residue sums differ, so the gamma-ratio evaluation does not apply."""


class MixedFamilies(ModelError):
    """A claim mixes Wallis-type and Catalan-type products."""


class InvalidClaim(ModelError):
    """An identity claim has a zero exponent, a nonpositive constant, or an empty side."""


class FamilyMismatch(ModelError):
    """An operation was asked of the wrong product family (e.g. gamma on a Catalan-type product)."""
