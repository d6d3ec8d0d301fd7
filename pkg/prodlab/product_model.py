"""
product_model.py - Wallis-type and Catalan-type products, the builtin catalog,
and the canonical factor form used for structural comparisons.

A Wallis-type product is periodic:

    prod_{n>=0} prod_j (P n + u_j) / (P n + v_j)

with the factors of one period in printed order u_1/v_1, u_2/v_2, ...

A Catalan-type product is a finite prefix of powered factors followed by a
factor stream cut into blocks; block k is raised to the exponent the block
schedule gives it.

Builtin ids are the equation numbers of the catalog (1-12, 4, 5, 15-18, 20).
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

# import from local modules
from prodlab.errors import InvalidProduct, UnknownBuiltin
from prodlab.numerics import E, Add, ConstExpr, Div, Integer, Mul, Pi, Pow, Sqrt, Sub

#####################################
# Wallis-type Products
#####################################


@dataclass(frozen=True)
class WallisProduct:
    """Periodic product of linear factors (P n + u_j) / (P n + v_j)."""

    period: int
    num_residues: tuple[int, ...]
    den_residues: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "num_residues", tuple(self.num_residues))
        object.__setattr__(self, "den_residues", tuple(self.den_residues))
        if self.period < 1:
            raise InvalidProduct(f"period must be positive, got {self.period}")
        if len(self.num_residues) != len(self.den_residues):
            raise InvalidProduct(
                f"{len(self.num_residues)} numerator residues but "
                f"{len(self.den_residues)} denominator residues"
            )
        if not self.num_residues:
            raise InvalidProduct("a Wallis-type product needs at least one factor")
        if min(self.num_residues + self.den_residues) < 1:
            raise InvalidProduct("residues must be >= 1")

    @property
    def is_balanced(self) -> bool:
        return sum(self.num_residues) == sum(self.den_residues)

    @property
    def factors_per_period(self) -> int:
        return len(self.num_residues)

    def period_factors(self, n: int) -> list[tuple[int, int]]:
        """Unreduced (numerator, denominator) pairs of period n in printed order."""
        base = self.period * n
        return [(base + u, base + v) for u, v in zip(self.num_residues, self.den_residues)]

    def factors(self) -> Iterator[Fraction]:
        """Endless iterator over the printed fractions."""
        n = 0
        while True:
            for a, b in self.period_factors(n):
                yield Fraction(a, b)
            n += 1

    def factor_integers(self, limit: int) -> Counter:
        """Signed multiset of the integers <= limit: +1 per numerator use, -1 per denominator use."""
        net: Counter = Counter()
        for residues, sign in ((self.num_residues, 1), (self.den_residues, -1)):
            for r in residues:
                for m in range(r, limit + 1, self.period):
                    net[m] += sign
        return Counter({k: v for k, v in net.items() if v})


def wallis_general(K: int) -> WallisProduct:
    """The K-th generalization K/(K-1) K/(K+1) 2K/(2K-1) 2K/(2K+1) ..."""
    if K < 2:
        raise InvalidProduct(f"K must be >= 2, got {K}")
    return WallisProduct(K, (K, K), (K - 1, K + 1))


#####################################
# Factor Streams
#####################################


@dataclass(frozen=True)
class PairsStream:
    """
    Periodic stream: element t is (P n + u_i) / (P n + v_i) with
    n, i = divmod(t + offset, len(pairs)).
    """

    period: int
    pairs: tuple[tuple[int, int], ...]
    offset: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if self.period < 1:
            raise InvalidProduct(f"period must be positive, got {self.period}")
        if not self.pairs:
            raise InvalidProduct("a pairs stream needs at least one pair")
        if any(u < 1 or v < 1 for u, v in self.pairs):
            raise InvalidProduct("stream residues must be >= 1")
        if self.offset < 0:
            raise InvalidProduct("offset must be >= 0")

    def raw(self, t: int) -> tuple[int, int]:
        n, i = divmod(t + self.offset, len(self.pairs))
        u, v = self.pairs[i]
        return self.period * n + u, self.period * n + v

    def factor(self, t: int) -> Fraction:
        a, b = self.raw(t)
        return Fraction(a, b)


@dataclass(frozen=True)
class ConstStream:
    """Every element is the same positive rational c."""

    c: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c <= 0:
            raise InvalidProduct(f"constant stream needs c > 0, got {self.c}")

    def raw(self, t: int) -> tuple[int, int]:
        return self.c.numerator, self.c.denominator

    def factor(self, t: int) -> Fraction:
        return self.c


FactorStream = Union[PairsStream, ConstStream]


def stream_factor(stream: FactorStream, t: int) -> Fraction:
    """The t-th factor of a stream, counted after its offset."""
    if t < 0:
        raise ValueError(f"stream index must be >= 0, got {t}")
    return stream.factor(t)


#####################################
# Block Schedules
#####################################


@dataclass(frozen=True)
class PippengerSchedule:
    """Block 1: one factor to the 1/K; block k >= 2: 2(K-1)K^(k-2) factors to the K^-k."""

    base: int

    def __post_init__(self) -> None:
        if self.base < 2:
            raise InvalidProduct(f"Pippenger base must be >= 2, got {self.base}")

    @property
    def block_count(self) -> Optional[int]:
        return None

    def size(self, k: int) -> int:
        if k == 1:
            return 1
        return 2 * (self.base - 1) * self.base ** (k - 2)

    def exponent(self, k: int) -> Fraction:
        return Fraction(1, self.base**k)

    def start(self, k: int) -> int:
        """Stream position of the first factor of block k (k >= 1)."""
        if k == 1:
            return 0
        return 2 * self.base ** (k - 2) - 1


@dataclass(frozen=True)
class GeometricSchedule:
    """Every block holds one factor; block k carries ratio^k."""

    ratio: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if not 0 < self.ratio < 1:
            raise InvalidProduct(f"geometric ratio must lie in (0, 1), got {self.ratio}")

    @property
    def block_count(self) -> Optional[int]:
        return None

    def size(self, k: int) -> int:
        return 1

    def exponent(self, k: int) -> Fraction:
        return self.ratio**k

    def start(self, k: int) -> int:
        return k - 1


@dataclass(frozen=True)
class ExplicitSchedule:
    """A finite list of (size, exponent) blocks."""

    blocks: tuple[tuple[int, Fraction], ...]
    _starts: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        blocks = tuple((int(s), Fraction(e)) for s, e in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise InvalidProduct("explicit schedule needs at least one block")
        if any(s < 1 or e <= 0 for s, e in blocks):
            raise InvalidProduct("explicit blocks need size >= 1 and exponent > 0")
        starts, position = [], 0
        for s, _ in blocks:
            starts.append(position)
            position += s
        object.__setattr__(self, "_starts", tuple(starts))

    @property
    def block_count(self) -> Optional[int]:
        return len(self.blocks)

    def size(self, k: int) -> int:
        return self.blocks[k - 1][0]

    def exponent(self, k: int) -> Fraction:
        return self.blocks[k - 1][1]

    def start(self, k: int) -> int:
        return self._starts[k - 1]


BlockSchedule = Union[PippengerSchedule, GeometricSchedule, ExplicitSchedule]


#####################################
# Catalan-type Products
#####################################


@dataclass(frozen=True)
class CatalanProduct:
    """Prefix factors with exponents, then a stream consumed block by block."""

    prefix: tuple[tuple[Fraction, Fraction], ...]
    stream: FactorStream
    schedule: BlockSchedule

    def __post_init__(self) -> None:
        prefix = tuple((Fraction(f), Fraction(e)) for f, e in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        if any(f <= 0 or e <= 0 for f, e in prefix):
            raise InvalidProduct("prefix factors and exponents must be positive")

    def without_prefix(self) -> CatalanProduct:
        return CatalanProduct((), self.stream, self.schedule)

    def block_positions(self, k: int) -> range:
        start = self.schedule.start(k)
        return range(start, start + self.schedule.size(k))

    def has_block(self, k: int) -> bool:
        count = self.schedule.block_count
        return count is None or k <= count


def pippenger_general(K: int) -> CatalanProduct:
    """Pippenger-style blocks over the factors of wallis_general(K)."""
    if K < 2:
        raise InvalidProduct(f"K must be >= 2, got {K}")
    return CatalanProduct(
        (), PairsStream(K, ((K, K - 1), (K, K + 1)), 0), PippengerSchedule(K)
    )


#####################################
# Canonical Factor Form
#####################################


@dataclass(frozen=True)
class CanonicalWallisForm:
    """
    A Wallis-type product at period Q with every residue in (0, Q], plus the
    boundary: integers whose factor must be removed again (+m: drop m from the
    numerator, -m: drop m from the denominator), stored as (m, signed count).
    """

    period: int
    num_residues: tuple[int, ...]
    den_residues: tuple[int, ...]
    boundary: tuple[tuple[int, int], ...]

    def refine(self, new_period: int) -> CanonicalWallisForm:
        """The same product at a multiple of the current period."""
        if new_period % self.period:
            raise ValueError(f"{new_period} is not a multiple of {self.period}")
        copies = new_period // self.period

        def spread(residues: tuple[int, ...]) -> tuple[int, ...]:
            return tuple(sorted(r + i * self.period for r in residues for i in range(copies)))

        return CanonicalWallisForm(
            new_period, spread(self.num_residues), spread(self.den_residues), self.boundary
        )

    def factor_integers(self, limit: int) -> Counter:
        """Signed multiset of integers <= limit after boundary exclusions."""
        net: Counter = Counter()
        for residues, sign in ((self.num_residues, 1), (self.den_residues, -1)):
            for r in residues:
                for m in range(r, limit + 1, self.period):
                    net[m] += sign
        for m, count in self.boundary:
            if m <= limit:
                net[m] -= count
        return Counter({k: v for k, v in net.items() if v})


def _reduce_residue(residue: int, period: int) -> tuple[int, list[int]]:
    """Residue in (0, period] plus the integers the original sequence skips."""
    reduced = (residue - 1) % period + 1
    skipped = list(range(reduced, residue, period))
    return reduced, skipped


def _boundary_tuple(counts: Counter) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((m, c) for m, c in counts.items() if c))


def _canonical_parts(
    prod: WallisProduct, period: int
) -> tuple[list[int], list[int], Counter]:
    if period % prod.period:
        raise ValueError(f"period {period} is not a multiple of {prod.period}")
    copies = period // prod.period
    boundary: Counter = Counter()
    sides: list[list[int]] = [[], []]
    for side, residues, sign in ((0, prod.num_residues, 1), (1, prod.den_residues, -1)):
        for u in residues:
            for i in range(copies):
                reduced, skipped = _reduce_residue(u + i * prod.period, period)
                sides[side].append(reduced)
                for m in skipped:
                    boundary[m] += sign
    return sides[0], sides[1], boundary


def canonicalize(prod: WallisProduct, period: int) -> CanonicalWallisForm:
    """Rewrite a product at a multiple Q of its period with residues in (0, Q]."""
    num, den, boundary = _canonical_parts(prod, period)
    return CanonicalWallisForm(
        period, tuple(sorted(num)), tuple(sorted(den)), _boundary_tuple(boundary)
    )


def common_period(prods: list[WallisProduct]) -> int:
    return math.lcm(*(p.period for p in prods))


def disjoint_union(prods: list[WallisProduct], period: Optional[int] = None) -> CanonicalWallisForm:
    """Canonical form of the product of several Wallis-type products."""
    if not prods:
        raise ValueError("disjoint_union needs at least one product")
    period = period or common_period(prods)
    num: list[int] = []
    den: list[int] = []
    boundary: Counter = Counter()
    for prod in prods:
        n, d, b = _canonical_parts(prod, period)
        num += n
        den += d
        boundary.update(b)
    return CanonicalWallisForm(
        period, tuple(sorted(num)), tuple(sorted(den)), _boundary_tuple(boundary)
    )


#####################################
# Builtin Catalog
#####################################

WALLIS_IDS = (1, 2, 3, 6, 7, 8, 9, 10, 11, 12)
CATALAN_IDS = (4, 5, 15, 16, 17, 18, 20)
BUILTIN_IDS = WALLIS_IDS + CATALAN_IDS

_WALLIS_TABLE: dict[int, tuple[int, tuple[int, ...], tuple[int, ...]]] = {
    1: (2, (2, 2), (1, 3)),
    2: (4, (4, 4), (3, 5)),
    3: (4, (2, 2), (1, 3)),
    6: (8, (2, 6, 8, 8), (3, 5, 7, 9)),
    7: (8, (2, 4, 4, 6), (1, 3, 5, 7)),
    8: (8, (8, 8), (7, 9)),
    9: (8, (2, 6), (3, 5)),
    10: (8, (2, 4, 4, 6, 8, 8), (3, 3, 5, 5, 7, 9)),
    11: (8, (2, 6), (1, 7)),
    12: (3, (3, 3), (2, 4)),
}

_TWO = ((Fraction(2), Fraction(1)),)


def _catalan_builtin(equation: int) -> CatalanProduct:
    if equation == 4:
        return CatalanProduct(_TWO, PairsStream(2, ((4, 3),)), PippengerSchedule(2))
    if equation == 5:
        return pippenger_general(2)
    if equation == 15:
        return CatalanProduct((), PairsStream(2, ((2, 3),)), PippengerSchedule(2))
    if equation == 16:
        return CatalanProduct(
            _TWO, PairsStream(8, ((2, 1), (2, 3), (6, 5), (6, 7)), 1), PippengerSchedule(2)
        )
    if equation == 17:
        return CatalanProduct(
            _TWO, PairsStream(8, ((4, 3), (4, 5), (8, 7), (8, 9))), PippengerSchedule(2)
        )
    if equation == 18:
        return pippenger_general(3)
    return CatalanProduct((), ConstStream(Fraction(2)), GeometricSchedule(Fraction(1, 2)))


def builtin(equation: int) -> Union[WallisProduct, CatalanProduct]:
    """Builtin product number `equation` of the catalog."""
    if equation in _WALLIS_TABLE:
        period, num, den = _WALLIS_TABLE[equation]
        return WallisProduct(period, num, den)
    if equation in CATALAN_IDS:
        return _catalan_builtin(equation)
    raise UnknownBuiltin(f"no builtin product for equation {equation}")


def _sqrt2() -> ConstExpr:
    return Sqrt(Integer(2))


_BUILTIN_VALUES: dict[int, ConstExpr] = {
    1: Div(Pi(), Integer(2)),
    2: Div(Pi(), Mul(Integer(2), _sqrt2())),
    3: _sqrt2(),
    6: Div(Pi(), Integer(4)),
    7: Integer(2),
    8: Div(Pi(), Mul(Integer(4), Sqrt(Sub(Integer(2), _sqrt2())))),
    9: Sqrt(Sub(Integer(2), _sqrt2())),
    10: Div(Pi(), Mul(Integer(2), Sqrt(Add(Integer(2), _sqrt2())))),
    11: Sqrt(Add(Integer(2), _sqrt2())),
    12: Div(Mul(Integer(2), Pi()), Mul(Integer(3), Sqrt(Integer(3)))),
    4: E(),
    5: Div(E(), Integer(2)),
    15: Div(E(), Integer(4)),
    16: Sqrt(E()),
    17: Div(Pow(E(), Fraction(3, 2)), Integer(2)),
    18: Div(Pow(E(), Fraction(2, 3)), Sqrt(Integer(3))),
    20: Integer(2),
}


def builtin_value(equation: int) -> ConstExpr:
    """Known value of builtin product number `equation`."""
    try:
        return _BUILTIN_VALUES[equation]
    except KeyError:
        raise UnknownBuiltin(f"no builtin product for equation {equation}") from None
