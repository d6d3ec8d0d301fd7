"""Shared fixtures and oracle helpers for the prodlab test suite."""

import random

import mpmath
import pytest

ORACLE_BITS = 512


def oracle(fn):
    """Evaluate fn() with mpmath at a precision far above anything under test."""
    with mpmath.workprec(ORACLE_BITS):
        return fn()


def rel_close(actual, expected, bits: int) -> bool:
    """|actual - expected| <= 2^(-bits) * max(1, |expected|), checked at oracle precision."""
    with mpmath.workprec(ORACLE_BITS):
        a = mpmath.mpf(actual)
        b = mpmath.mpf(expected)
        return abs(a - b) <= mpmath.ldexp(1, -bits) * max(1, abs(b))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def isolated_env(monkeypatch, tmp_path):
    """Clear PRODLAB_* settings so the built-in defaults apply."""
    for name in (
        "PRODLAB_PRECISION_BITS",
        "PRODLAB_CONJECTURE_PRECISION_BITS",
        "PRODLAB_OUTPUT_FORMAT",
        "PRODLAB_TOLERANCE",
        "PRODLAB_IDENTITY_TOLERANCE",
        "PRODLAB_IDENTITY_WINDOW",
        "PRODLAB_EXTRAPOLATION_PERIODS",
        "PRODLAB_EXTRAPOLATION_LEVELS",
        "PRODLAB_CONJECTURE_BLOCKS",
        "PRODLAB_FACTOR_BUDGET",
        "PRODLAB_CLAIMS_DIR",
    ):
        monkeypatch.delenv(name, raising=False)
    return tmp_path
