"""
cli_app.py - the prodlab command line.

    prodlab eval SPEC [--periods N | --fractions N | --blocks N]
    prodlab limit SPEC [--method gamma|extrapolate|blocks] [--tol T] [--periods N] [--levels L]
    prodlab verify [PATH ...]
    prodlab conjecture --k A..B [--blocks N] [--output FILE]
    prodlab render SPEC

SPEC is either DSL text or the path of a .prod / .claim file.
Every command accepts --precision BITS and --format json|text.

Exit codes:
    0  success, claim verified
    1  claim refuted, or the operation does not fit the product family
    2  parse error or unreadable input
    3  numeric failure, budget exceeded, or an inconclusive verdict

Defaults come from utils/utils_config.py (and so from .env).
"""

#####################################
# Imports
#####################################

# import from Python Standard Library
from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

# import from local modules
import utils.utils_config as config
from prodlab.conjecture_lab import conjecture_report
from prodlab.errors import FamilyMismatch, ModelError, NumericError
from prodlab.evaluator import (
    EvalMethod,
    EvalReport,
    catalan_block_partial,
    catalan_limit,
    contract_bound,
    wallis_fraction_report,
    wallis_limit_extrapolated,
    wallis_partial_report,
)
from prodlab.gamma_engine import eq13_closed_form, eq21_eval, reflection_closed_form
from prodlab.identity_lab import (
    IdentityClaim,
    Inconclusive,
    Refuted,
    verdict_to_dict,
    verify_identity,
)
from prodlab.numerics import MIN_PRECISION_BITS, ConstExpr
from prodlab.product_dsl import ParseError, ParseErrorKind, SourceSpan, parse, render
from prodlab.product_model import (
    BUILTIN_IDS,
    CatalanProduct,
    WallisProduct,
    builtin,
    builtin_value,
    wallis_general,
)
from utils.utils_logger import logger

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3

DEFAULT_PERIODS = 10
DEFAULT_BLOCKS = 10

#####################################
# Run Configuration
#####################################


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int
    output_format: str
    tolerance: Fraction
    identity_tolerance: Fraction
    identity_window: int
    extrapolation_periods: int
    extrapolation_levels: int
    conjecture_blocks: int
    conjecture_precision_bits: int
    factor_budget: int
    claims_path: pathlib.Path

    def __post_init__(self) -> None:
        if self.precision_bits < MIN_PRECISION_BITS:
            raise ValueError(f"precision must be >= {MIN_PRECISION_BITS} bits")
        if min(self.identity_window, self.extrapolation_periods, self.factor_budget) < 1:
            raise ValueError("budgets must be positive")
        if self.output_format not in ("json", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")

    @classmethod
    def from_environment(cls) -> RunConfig:
        return cls(
            precision_bits=config.get_precision_bits(),
            output_format=config.get_output_format(),
            tolerance=config.get_default_tolerance(),
            identity_tolerance=config.get_identity_tolerance(),
            identity_window=config.get_identity_window(),
            extrapolation_periods=config.get_extrapolation_periods(),
            extrapolation_levels=config.get_extrapolation_levels(),
            conjecture_blocks=config.get_conjecture_blocks(),
            conjecture_precision_bits=config.get_conjecture_precision_bits(),
            factor_budget=config.get_factor_budget(),
            claims_path=config.get_claims_path(),
        )

    def with_args(self, args: argparse.Namespace) -> RunConfig:
        changes: dict[str, Any] = {}
        if args.precision is not None:
            changes["precision_bits"] = args.precision
            changes["conjecture_precision_bits"] = args.precision
        if args.format is not None:
            changes["output_format"] = args.format
        if getattr(args, "tol", None) is not None:
            changes["tolerance"] = args.tol
        return replace(self, **changes)


#####################################
# Spec Loading and Output
#####################################


def read_spec_file(path: pathlib.Path) -> str:
    """File contents as UTF-8 text; undecodable bytes are a parse error at their position."""
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        before = data[: e.start].decode("utf-8", errors="replace")
        span = SourceSpan.at(before, len(before), len(before) + 1)
        raise ParseError(
            ParseErrorKind.SYNTAX, f"{path.name}: invalid UTF-8 byte 0x{data[e.start]:02x}", span
        ) from None


def load_spec(text_or_path: str):
    """Parse DSL text, reading it from a file first when the argument names one."""
    path = pathlib.Path(text_or_path)
    if path.suffix in (".prod", ".claim") or path.is_file():
        logger.info(f"Reading spec from {path}")
        return parse(read_spec_file(path))
    return parse(text_or_path)


def _product(spec) -> Union[WallisProduct, CatalanProduct]:
    if isinstance(spec, IdentityClaim):
        raise FamilyMismatch("expected a product, got a claim")
    return spec


def _text_lines(doc: Any, indent: str = "") -> list[str]:
    lines: list[str] = []
    if isinstance(doc, dict):
        for key, value in doc.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{indent}{key}:")
                lines += _text_lines(value, indent + "  ")
            else:
                lines.append(f"{indent}{key}: {value}")
    elif isinstance(doc, list):
        for item in doc:
            if isinstance(item, (dict, list)):
                lines.append(f"{indent}-")
                lines += _text_lines(item, indent + "  ")
            else:
                lines.append(f"{indent}- {item}")
    return lines


def format_document(doc: dict[str, Any], output_format: str) -> str:
    if output_format == "json":
        return json.dumps(doc, indent=2)
    return "\n".join(_text_lines(doc))


def emit(doc: dict[str, Any], run: RunConfig) -> None:
    print(format_document(doc, run.output_format))


#####################################
# Closed Forms
#####################################


def closed_form_for(prod: Union[WallisProduct, CatalanProduct]) -> Optional[ConstExpr]:
    """Known closed form: catalog entry, then the general-K form, then reflection pairing."""
    for equation in BUILTIN_IDS:
        if builtin(equation) == prod:
            return builtin_value(equation)
    if isinstance(prod, CatalanProduct):
        return None
    if prod.period >= 2 and wallis_general(prod.period) == prod:
        return eq13_closed_form(prod.period)
    return reflection_closed_form(prod)


#####################################
# Commands
#####################################


def cmd_eval(args: argparse.Namespace, run: RunConfig) -> int:
    prod = _product(load_spec(args.spec))
    if isinstance(prod, WallisProduct):
        if args.blocks is not None:
            raise FamilyMismatch("--blocks applies to Catalan-type products")
        if args.fractions is not None:
            report = wallis_fraction_report(prod, args.fractions, run.precision_bits)
        else:
            periods = DEFAULT_PERIODS if args.periods is None else args.periods
            report = wallis_partial_report(prod, periods, run.precision_bits)
    else:
        if args.periods is not None or args.fractions is not None:
            raise FamilyMismatch("--periods and --fractions apply to Wallis-type products")
        blocks = DEFAULT_BLOCKS if args.blocks is None else args.blocks
        report = catalan_block_partial(prod, blocks, run.precision_bits)
    emit({"spec": render(prod), **report.to_dict()}, run)
    return EXIT_OK


def _limit_report(prod, method: str, args: argparse.Namespace, run: RunConfig) -> EvalReport:
    if method == "blocks":
        if not isinstance(prod, CatalanProduct):
            raise FamilyMismatch("--method blocks applies to Catalan-type products")
        return catalan_limit(prod, run.tolerance, run.precision_bits)
    if not isinstance(prod, WallisProduct):
        raise FamilyMismatch(f"--method {method} applies to Wallis-type products")
    if method == "gamma":
        value = eq21_eval(prod, run.precision_bits)
        return EvalReport(value, 0, EvalMethod.GAMMA, contract_bound(value))
    periods = run.extrapolation_periods if args.periods is None else args.periods
    levels = run.extrapolation_levels if args.levels is None else args.levels
    return wallis_limit_extrapolated(prod, periods, levels, run.precision_bits)


def cmd_limit(args: argparse.Namespace, run: RunConfig) -> int:
    prod = _product(load_spec(args.spec))
    method = args.method or ("gamma" if isinstance(prod, WallisProduct) else "blocks")
    logger.info(f"limit of {render(prod)} by {method}")
    report = _limit_report(prod, method, args, run)
    doc = {"spec": render(prod), **report.to_dict()}
    closed = closed_form_for(prod)
    if closed is not None:
        doc["closed_form"] = closed.render()
    emit(doc, run)
    return EXIT_OK


def _claim_files(paths: Sequence[str], run: RunConfig) -> list[pathlib.Path]:
    targets = [pathlib.Path(p) for p in paths] or [run.claims_path]
    files: list[pathlib.Path] = []
    for target in targets:
        if target.is_dir():
            files += sorted(target.glob("*.claim"))
        else:
            files.append(target)
    return files


def _verify_one(path: pathlib.Path, run: RunConfig) -> tuple[dict[str, Any], int]:
    entry: dict[str, Any] = {"file": path.as_posix()}
    try:
        claim = parse(read_spec_file(path))
        if not isinstance(claim, IdentityClaim):
            raise FamilyMismatch(f"{path.name} defines a product, not a claim")
        entry["claim"] = render(claim)
        logger.info(f"Verifying {path.name}")
        verdict = verify_identity(
            claim, run.identity_window, run.identity_tolerance, run.precision_bits
        )
    except ParseError as e:
        logger.error(f"ERROR: {path}: {e}")
        return {**entry, "verdict": "parse-error", "detail": str(e)}, EXIT_PARSE
    except OSError as e:
        logger.error(f"ERROR: cannot read {path}: {e}")
        return {**entry, "verdict": "unreadable", "detail": str(e)}, EXIT_PARSE
    except NumericError as e:
        logger.error(f"ERROR: {path}: {e}")
        return {**entry, "verdict": "numeric-error", "detail": str(e)}, EXIT_NUMERIC
    except ModelError as e:
        logger.error(f"ERROR: {path}: {e}")
        return {**entry, "verdict": "mismatch", "detail": str(e)}, EXIT_REFUTED

    if isinstance(verdict, Refuted):
        code = EXIT_REFUTED
    elif isinstance(verdict, Inconclusive):
        code = EXIT_NUMERIC
    else:
        code = EXIT_OK
    logger.info(f"{path.name}: {verdict.describe()}")
    return {**entry, **verdict_to_dict(verdict)}, code


def cmd_verify(args: argparse.Namespace, run: RunConfig) -> int:
    files = _claim_files(args.paths, run)
    if not files:
        logger.error("ERROR: no claim files found.")
        emit({"claims": [], "verdict": "no-claims"}, run)
        return EXIT_PARSE
    results = [_verify_one(path, run) for path in files]
    code = max(c for _, c in results)
    if len(results) == 1:
        emit(results[0][0], run)
    else:
        verified = sum(1 for _, c in results if c == EXIT_OK)
        emit(
            {
                "claims": [entry for entry, _ in results],
                "verified": verified,
                "total": len(results),
                "verdict": "verified" if code == EXIT_OK else "failed",
            },
            run,
        )
    return code


def parse_k_range(text: str) -> list[int]:
    """'2..5' -> [2, 3, 4, 5]; '7' -> [7]"""
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad K range {text!r}") from None
    if low < 2 or high < low:
        raise argparse.ArgumentTypeError(f"K range must satisfy 2 <= A <= B, got {text!r}")
    return list(range(low, high + 1))


def cmd_conjecture(args: argparse.Namespace, run: RunConfig) -> int:
    blocks = args.blocks or run.conjecture_blocks
    report = conjecture_report(
        args.k, run.conjecture_precision_bits, blocks, run.factor_budget
    )
    text = format_document(report, run.output_format)
    if args.output:
        out = pathlib.Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        logger.info(f"Conjecture report written to {out}")
    print(text)
    return EXIT_OK


def cmd_render(args: argparse.Namespace, run: RunConfig) -> int:
    text = render(load_spec(args.spec))
    if run.output_format == "json":
        emit({"spec": text}, run)
    else:
        print(text)
    return EXIT_OK


#####################################
# Argument Parsing
#####################################


def _precision(text: str) -> int:
    bits = int(text)
    if bits < MIN_PRECISION_BITS:
        raise argparse.ArgumentTypeError(f"precision must be >= {MIN_PRECISION_BITS} bits")
    return bits


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a count >= 0, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a count >= 1, got {text}")
    return value


def _tolerance(text: str) -> Fraction:
    try:
        tol = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from None
    if tol <= 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return tol


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_precision, help="precision in bits")
    common.add_argument("--format", choices=("json", "text"), help="output format")

    parser = argparse.ArgumentParser(
        prog="prodlab", description="Evaluate and verify Wallis-type and Catalan-type products."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common], help="partial products")
    p_eval.add_argument("spec")
    count = p_eval.add_mutually_exclusive_group()
    count.add_argument("--periods", type=_count)
    count.add_argument("--fractions", type=_count)
    count.add_argument("--blocks", type=_count)
    p_eval.set_defaults(handler=cmd_eval)

    p_limit = sub.add_parser("limit", parents=[common], help="infinite products")
    p_limit.add_argument("spec")
    p_limit.add_argument("--method", choices=("gamma", "extrapolate", "blocks"))
    p_limit.add_argument("--tol", type=_tolerance)
    p_limit.add_argument("--periods", type=_positive)
    p_limit.add_argument("--levels", type=_positive)
    p_limit.set_defaults(handler=cmd_limit)

    p_verify = sub.add_parser("verify", parents=[common], help="verify identity claims")
    p_verify.add_argument("paths", nargs="*")
    p_verify.set_defaults(handler=cmd_verify)

    p_conj = sub.add_parser("conjecture", parents=[common], help="explore pippenger_general(K)")
    p_conj.add_argument("--k", type=parse_k_range, required=True)
    p_conj.add_argument("--blocks", type=int)
    p_conj.add_argument("--output")
    p_conj.set_defaults(handler=cmd_conjecture)

    p_render = sub.add_parser("render", parents=[common], help="canonical DSL text")
    p_render.add_argument("spec")
    p_render.set_defaults(handler=cmd_render)
    return parser


#####################################
# Main
#####################################


def _failure(run: RunConfig, kind: str, error: Exception, code: int) -> int:
    logger.error(f"ERROR: {kind}: {error}")
    emit({"error": kind, "message": str(error)}, run)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = RunConfig.from_environment().with_args(args)
    except ValueError as e:
        parser.error(str(e))

    logger.info(f"prodlab {args.command} (precision {run.precision_bits} bits)")
    try:
        return args.handler(args, run)
    except ParseError as e:
        return _failure(run, "parse-error", e, EXIT_PARSE)
    except OSError as e:
        return _failure(run, "unreadable", e, EXIT_PARSE)
    except NumericError as e:
        return _failure(run, type(e).__name__, e, EXIT_NUMERIC)
    except ModelError as e:
        return _failure(run, type(e).__name__, e, EXIT_REFUTED)


if __name__ == "__main__":
    sys.exit(main())
