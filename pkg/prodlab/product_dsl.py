"""
product_dsl.py - parser and printer for product definitions and identity claims.

Examples:

    wallis{period=8; num=[2,4,4,6]; den=[1,3,5,7]}
    blocks{prefix=[(2,1)]; stream=pairs(period=2, [(4,3)]); schedule=pippenger(2)}
    paper(18)
    claim{lhs=paper(5)^2; rhs=const(1/2)*paper(16)*paper(17)}

Whitespace between tokens is free, '#' starts a comment running to the end
of the line. A trailing ';' before a closing '}' is accepted.
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

# import from local modules
from prodlab.errors import InvalidProduct, ProdlabError, UnknownBuiltin
from prodlab.identity_lab import ClaimSide, IdentityClaim, ProductRef
from prodlab.product_model import (
    CatalanProduct,
    ConstStream,
    ExplicitSchedule,
    GeometricSchedule,
    PairsStream,
    PippengerSchedule,
    WallisProduct,
    builtin,
    pippenger_general,
    wallis_general,
)

Spec = Union[WallisProduct, CatalanProduct, IdentityClaim]

#####################################
# Diagnostics
#####################################


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    @classmethod
    def at(cls, text: str, start: int, end: int) -> SourceSpan:
        line = text.count("\n", 0, start) + 1
        column = start - (text.rfind("\n", 0, start) + 1) + 1
        return cls(start, end, line, column)


class ParseErrorKind(enum.Enum):
    SYNTAX = "syntax"
    UNKNOWN_BUILTIN = "unknown-builtin"
    UNBALANCED_RESIDUES = "unbalanced-residues"
    BAD_SCHEDULE = "bad-schedule"


class ParseError(ProdlabError):
    def __init__(self, kind: ParseErrorKind, message: str, span: SourceSpan):
        super().__init__(f"{span.line}:{span.column}: {kind.value}: {message}")
        self.kind = kind
        self.message = message
        self.span = span


#####################################
# Tokens
#####################################

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+|\#[^\n]*)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<punct>[{}\[\]();,=*^/\-])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else f"'{self.text}'"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            span = SourceSpan.at(text, pos, pos + 1)
            raise ParseError(ParseErrorKind.SYNTAX, f"unexpected character '{text[pos]}'", span)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), match.start(), match.end()))
        pos = match.end()
    tokens.append(Token("eof", "", len(text), len(text)))
    return tokens


#####################################
# Parser
#####################################


class _Parser:
    """Recursive descent over the token list, one method per grammar rule."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers --

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def span(self, first: Token, last: Optional[Token] = None) -> SourceSpan:
        last = last or first
        return SourceSpan.at(self.text, first.start, max(first.end, last.end))

    def fail(self, kind: ParseErrorKind, message: str, first: Token, last: Optional[Token] = None):
        raise ParseError(kind, message, self.span(first, last))

    def at(self, text: str) -> bool:
        token = self.peek()
        return token.kind in ("punct", "ident") and token.text == text

    def expect(self, text: str) -> Token:
        token = self.peek()
        if not self.at(text):
            self.fail(ParseErrorKind.SYNTAX, f"expected '{text}' but found {token.describe()}", token)
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def field(self, name: str) -> None:
        self.expect(name)
        self.expect("=")

    def integer(self) -> tuple[int, Token]:
        token = self.peek()
        if token.kind != "int":
            self.fail(ParseErrorKind.SYNTAX, f"expected an integer but found {token.describe()}", token)
        self.advance()
        return int(token.text), token

    def positive(self, what: str) -> tuple[int, Token]:
        value, token = self.integer()
        if value < 1:
            self.fail(ParseErrorKind.SYNTAX, f"{what} must be positive, got '{token.text}'", token)
        return value, token

    def fraction(self, signed: bool = False) -> tuple[Fraction, Token, Token]:
        first = self.peek()
        negative = signed and self.accept("-")
        num, last = self.integer()
        den = 1
        if self.accept("/"):
            den, last = self.integer()
            if den == 0:
                self.fail(ParseErrorKind.SYNTAX, "zero denominator", last)
        value = Fraction(num, den)
        return (-value if negative else value), first, last

    def end_of_body(self) -> Token:
        self.accept(";")
        return self.expect("}")

    # -- grammar rules --

    def spec(self) -> Spec:
        token = self.peek()
        if self.at("wallis"):
            result: Spec = self.wallis()
        elif self.at("blocks"):
            result = self.blocks()
        elif self.at("claim"):
            result = self.claim()
        elif token.kind == "ident":
            result = self.builtin()[0]
        else:
            self.fail(ParseErrorKind.SYNTAX, f"expected a product or claim but found {token.describe()}", token)
        trailing = self.peek()
        if trailing.kind != "eof":
            self.fail(ParseErrorKind.SYNTAX, f"unexpected {trailing.describe()} after the end", trailing)
        return result

    def intlist(self, what: str) -> tuple[list[int], Token, Token]:
        first = self.expect("[")
        values = [self.positive(what)[0]]
        while self.accept(","):
            values.append(self.positive(what)[0])
        last = self.expect("]")
        return values, first, last

    def wallis(self) -> WallisProduct:
        head = self.expect("wallis")
        self.expect("{")
        self.field("period")
        period, _ = self.positive("period")
        self.expect(";")
        self.field("num")
        num, num_first, _ = self.intlist("residue")
        self.expect(";")
        self.field("den")
        den, _, den_last = self.intlist("residue")
        self.end_of_body()
        if len(num) != len(den):
            self.fail(
                ParseErrorKind.UNBALANCED_RESIDUES,
                f"{len(num)} numerator residues but {len(den)} denominator residues",
                num_first,
                den_last,
            )
        if sum(num) != sum(den):
            self.fail(
                ParseErrorKind.UNBALANCED_RESIDUES,
                f"residue sums differ: {sum(num)} != {sum(den)}",
                num_first,
                den_last,
            )
        try:
            return WallisProduct(period, tuple(num), tuple(den))
        except InvalidProduct as e:
            self.fail(ParseErrorKind.SYNTAX, str(e), head, den_last)

    def prefix(self) -> list[tuple[Fraction, Fraction]]:
        self.expect("[")
        entries: list[tuple[Fraction, Fraction]] = []
        if self.at("]"):
            self.advance()
            return entries
        while True:
            open_token = self.expect("(")
            factor, _, _ = self.fraction()
            self.expect(",")
            exponent, _, _ = self.fraction()
            close = self.expect(")")
            if factor <= 0 or exponent <= 0:
                self.fail(ParseErrorKind.SYNTAX, "prefix factors and exponents must be positive", open_token, close)
            entries.append((factor, exponent))
            if not self.accept(","):
                break
        self.expect("]")
        return entries

    def pair(self) -> tuple[int, int]:
        self.expect("(")
        u, _ = self.positive("stream residue")
        self.expect(",")
        v, _ = self.positive("stream residue")
        self.expect(")")
        return u, v

    def stream(self) -> Union[PairsStream, ConstStream]:
        token = self.peek()
        if self.accept("const"):
            self.expect("(")
            c, first, last = self.fraction()
            self.expect(")")
            if c <= 0:
                self.fail(ParseErrorKind.SYNTAX, f"constant stream needs a positive value, got '{c}'", first, last)
            return ConstStream(c)
        if not self.accept("pairs"):
            self.fail(ParseErrorKind.SYNTAX, f"expected 'pairs' or 'const' but found {token.describe()}", token)
        self.expect("(")
        self.field("period")
        period, _ = self.positive("period")
        self.expect(",")
        self.expect("[")
        pairs = [self.pair()]
        while self.accept(","):
            pairs.append(self.pair())
        self.expect("]")
        offset = 0
        if self.accept(","):
            self.field("offset")
            offset, _ = self.integer()
        self.expect(")")
        return PairsStream(period, tuple(pairs), offset)

    def schedule(self):
        token = self.peek()
        name = token.text if token.kind == "ident" else None
        if name not in ("pippenger", "geometric", "explicit"):
            self.fail(ParseErrorKind.BAD_SCHEDULE, f"unknown schedule {token.describe()}", token)
        self.advance()
        self.expect("(")
        if name == "pippenger":
            base, base_token = self.integer()
            close = self.expect(")")
            if base < 2:
                self.fail(ParseErrorKind.BAD_SCHEDULE, f"pippenger base must be >= 2, got '{base}'", token, close)
            return PippengerSchedule(base)
        if name == "geometric":
            ratio, _, _ = self.fraction()
            close = self.expect(")")
            if not 0 < ratio < 1:
                self.fail(ParseErrorKind.BAD_SCHEDULE, f"geometric ratio must lie in (0, 1), got '{ratio}'", token, close)
            return GeometricSchedule(ratio)
        blocks: list[tuple[int, Fraction]] = []
        while self.at("("):
            self.advance()
            size, _ = self.integer()
            self.expect(",")
            exponent, _, _ = self.fraction()
            self.expect(")")
            blocks.append((size, exponent))
            self.accept(",")
        close = self.expect(")")
        if not blocks or any(s < 1 or e <= 0 for s, e in blocks):
            self.fail(
                ParseErrorKind.BAD_SCHEDULE,
                "explicit schedule needs blocks with size >= 1 and exponent > 0",
                token,
                close,
            )
        return ExplicitSchedule(tuple(blocks))

    def blocks(self) -> CatalanProduct:
        self.expect("blocks")
        self.expect("{")
        self.field("prefix")
        prefix = self.prefix()
        self.expect(";")
        self.field("stream")
        stream = self.stream()
        self.expect(";")
        self.field("schedule")
        schedule = self.schedule()
        self.end_of_body()
        return CatalanProduct(tuple(prefix), stream, schedule)

    def builtin(self) -> tuple[Union[WallisProduct, CatalanProduct], str]:
        token = self.peek()
        if token.kind != "ident" or token.text not in ("paper", "wallis_general", "pippenger_general"):
            self.fail(ParseErrorKind.SYNTAX, f"unknown keyword {token.describe()}", token)
        self.advance()
        self.expect("(")
        number, number_token = self.integer()
        close = self.expect(")")
        label = f"{token.text}({number})"
        try:
            if token.text == "paper":
                return builtin(number), label
            if token.text == "wallis_general":
                return wallis_general(number), label
            return pippenger_general(number), label
        except (UnknownBuiltin, InvalidProduct) as e:
            self.fail(ParseErrorKind.UNKNOWN_BUILTIN, f"{label}: {e}", token, close)

    def term(self, side: list, constants: list[Fraction]) -> None:
        if self.at("const"):
            self.advance()
            self.expect("(")
            c, first, last = self.fraction()
            self.expect(")")
            if c <= 0:
                self.fail(ParseErrorKind.SYNTAX, f"claim constant must be positive, got '{c}'", first, last)
            constants.append(c)
            return
        if self.at("wallis"):
            product: Union[WallisProduct, CatalanProduct] = self.wallis()
            label = render(product)
        elif self.at("blocks"):
            product = self.blocks()
            label = render(product)
        else:
            product, label = self.builtin()
        exponent = Fraction(1)
        if self.accept("^"):
            exponent, first, last = self.fraction(signed=True)
            if exponent == 0:
                self.fail(ParseErrorKind.SYNTAX, "exponent must be nonzero", first, last)
        side.append((ProductRef(label, product), exponent))

    def side(self) -> ClaimSide:
        first = self.peek()
        terms: list = []
        constants: list[Fraction] = []
        self.term(terms, constants)
        while self.accept("*"):
            self.term(terms, constants)
        if not terms:
            self.fail(ParseErrorKind.SYNTAX, "a claim side needs at least one product", first, self.tokens[self.pos - 1])
        constant = Fraction(1)
        for c in constants:
            constant *= c
        return ClaimSide(tuple(terms), constant)

    def claim(self) -> IdentityClaim:
        self.expect("claim")
        self.expect("{")
        self.field("lhs")
        lhs = self.side()
        self.expect(";")
        self.field("rhs")
        rhs = self.side()
        self.end_of_body()
        return IdentityClaim(lhs, rhs)


def parse(text: str) -> Spec:
    """Parse one product definition, builtin reference, or claim."""
    return _Parser(text).spec()


#####################################
# Printer
#####################################


def _frac(value: Fraction) -> str:
    return str(value)


def _render_stream(stream: Union[PairsStream, ConstStream]) -> str:
    if isinstance(stream, ConstStream):
        return f"const({_frac(stream.c)})"
    pairs = ",".join(f"({u},{v})" for u, v in stream.pairs)
    offset = f", offset={stream.offset}" if stream.offset else ""
    return f"pairs(period={stream.period}, [{pairs}]{offset})"


def _render_schedule(schedule) -> str:
    if isinstance(schedule, PippengerSchedule):
        return f"pippenger({schedule.base})"
    if isinstance(schedule, GeometricSchedule):
        return f"geometric({_frac(schedule.ratio)})"
    blocks = " ".join(f"({s},{_frac(e)})" for s, e in schedule.blocks)
    return f"explicit({blocks})"


def _render_side(side: ClaimSide) -> str:
    parts = [] if side.constant == 1 else [f"const({_frac(side.constant)})"]
    for ref, exponent in side.terms:
        parts.append(ref.label if exponent == 1 else f"{ref.label}^{_frac(exponent)}")
    return "*".join(parts)


def render(spec: Spec) -> str:
    """Canonical text; parse(render(x)) == x."""
    if isinstance(spec, WallisProduct):
        num = ",".join(map(str, spec.num_residues))
        den = ",".join(map(str, spec.den_residues))
        return f"wallis{{period={spec.period}; num=[{num}]; den=[{den}]}}"
    if isinstance(spec, CatalanProduct):
        prefix = ",".join(f"({_frac(f)},{_frac(e)})" for f, e in spec.prefix)
        return (
            f"blocks{{prefix=[{prefix}]; stream={_render_stream(spec.stream)}; "
            f"schedule={_render_schedule(spec.schedule)}}}"
        )
    return f"claim{{lhs={_render_side(spec.lhs)}; rhs={_render_side(spec.rhs)}}}"
