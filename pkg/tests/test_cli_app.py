import json
import math
import pathlib

import pytest

from prodlab.cli_app import main, parse_k_range

ROOT = pathlib.Path(__file__).resolve().parent.parent
CLAIMS = ROOT / "claims"
MUTATIONS = ROOT / "tests" / "data" / "mutations"


@pytest.fixture
def run(capsys, isolated_env):
    def invoke(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out
        return code, out

    return invoke


def run_json(run, *argv):
    code, out = run(*argv)
    return code, json.loads(out)


def test_eval_wallis_periods(run):
    code, doc = run_json(run, "eval", "paper(1)", "--periods", "3")
    assert code == 0
    assert doc["rational"] == "256/175"
    assert doc["value_decimal"].startswith("1.4628571428")
    assert doc["method"] == "exact-partial"


def test_eval_empty_product(run):
    code, doc = run_json(run, "eval", "paper(1)", "--periods", "0")
    assert code == 0
    assert doc["rational"] == "1/1"


def test_eval_printed_fractions(run):
    code, doc = run_json(run, "eval", "paper(1)", "--fractions", "3")
    assert code == 0
    assert doc["rational"] == "16/9"


def test_eval_first_block(run):
    code, doc = run_json(run, "eval", "paper(18)", "--blocks", "1")
    assert code == 0
    assert doc["value_decimal"].startswith("1.14471424255")
    assert "log_tail_bound" in doc


def test_eval_from_file(run):
    code, doc = run_json(run, "eval", str(ROOT / "products" / "wallis_eq7.prod"), "--periods", "1")
    assert code == 0
    assert doc["rational"] == "64/35"


def test_eval_family_mismatch(run):
    code, doc = run_json(run, "eval", "paper(1)", "--blocks", "2")
    assert code == 1
    assert doc["error"] == "FamilyMismatch"


def test_eval_parse_error(run):
    code, doc = run_json(run, "eval", "wallis{period=2; num=[2,2]; den=[1,4]}")
    assert code == 2
    assert doc["error"] == "parse-error"


def test_missing_file(run, tmp_path):
    code, _ = run("eval", str(tmp_path / "missing.prod"))
    assert code == 2


def test_limit_gamma_with_closed_form(run):
    code, doc = run_json(run, "limit", "wallis_general(3)", "--method", "gamma")
    assert code == 0
    assert doc["closed_form"] == "2*pi/(3*sqrt(3))"
    assert doc["value_decimal"].startswith("1.20919957615614")
    assert doc["method"] == "gamma"


def test_limit_gamma_radical(run):
    code, doc = run_json(run, "limit", "paper(9)", "--method", "gamma")
    assert code == 0
    assert doc["closed_form"] == "sqrt(2-sqrt(2))"
    assert doc["value_decimal"].startswith("0.76536686473")


def test_limit_reflection_closed_form_for_unlisted_product(run):
    code, doc = run_json(run, "limit", "wallis{period=5; num=[2,3]; den=[1,4]}")
    assert code == 0
    assert "closed_form" in doc


def test_limit_extrapolate(run):
    code, doc = run_json(run, "limit", "paper(1)", "--method", "extrapolate", "--periods", "4096", "--levels", "3")
    assert code == 0
    assert doc["error_bound"] == "heuristic"
    assert abs(float(doc["value_decimal"]) - math.pi / 2) < 1e-8


def test_limit_blocks(run):
    code, doc = run_json(run, "limit", "paper(5)", "--method", "blocks", "--tol", "1e-5")
    assert code == 0
    assert abs(float(doc["value_decimal"]) - math.e / 2) < 1e-4
    assert doc["closed_form"] == "e/2"


@pytest.mark.parametrize("spec, method", [("paper(5)", "gamma"), ("paper(1)", "blocks"), ("paper(4)", "extrapolate")])
def test_limit_method_mismatch(run, spec, method):
    code, _ = run("limit", spec, "--method", method)
    assert code == 1


def test_limit_no_convergence(run):
    code, doc = run_json(
        run, "limit", "blocks{prefix=[]; stream=const(2); schedule=pippenger(2)}", "--method", "blocks"
    )
    assert code == 3
    assert doc["error"] == "NoConvergence"


def test_verify_structural(run):
    code, doc = run_json(run, "verify", str(CLAIMS / "wallis_6_7.claim"))
    assert code == 0
    assert doc["verdict"] == "structural"


def test_verify_residual(run):
    code, doc = run_json(run, "verify", str(CLAIMS / "square_16_17.claim"))
    assert code == 0
    assert doc["detail"] == "structural, residual 2"


def test_verify_refuted(run):
    code, doc = run_json(run, "verify", str(MUTATIONS / "wallis_6_6.claim"))
    assert code == 1
    assert doc["verdict"] == "refuted"


def test_verify_product_file_is_not_a_claim(run):
    code, _ = run("verify", str(ROOT / "products" / "sqrt_e.prod"))
    assert code == 1


def test_verify_parse_error(run, tmp_path):
    bad = tmp_path / "bad.claim"
    bad.write_text("claim { lhs = paper(1) rhs = paper(6) }")
    code, doc = run_json(run, "verify", str(bad))
    assert code == 2
    assert doc["verdict"] == "parse-error"


def test_verify_empty_directory(run, tmp_path):
    code, _ = run("verify", str(tmp_path))
    assert code == 2


def test_conjecture_budget(run):
    code, doc = run_json(run, "conjecture", "--k", "100")
    assert code == 3
    assert doc["error"] == "BudgetExceeded"


@pytest.mark.slow
def test_conjecture_writes_report(run, tmp_path):
    out = tmp_path / "reports" / "k2.json"
    code, doc = run_json(run, "conjecture", "--k", "2..2", "--blocks", "5", "--output", str(out))
    assert code == 0
    assert doc["rows"][0]["candidates"][0]["expr"] == "e*2^(-1)"
    assert json.loads(out.read_text()) == doc


def test_render(run):
    code, out = run("render", "paper(12)", "--format", "text")
    assert code == 0
    assert out.strip() == "wallis{period=3; num=[3,3]; den=[2,4]}"


def test_text_format(run):
    code, out = run("eval", "paper(1)", "--periods", "3", "--format", "text")
    assert code == 0
    assert "rational: 256/175" in out.splitlines()


def test_output_is_deterministic(run):
    first = run("limit", "paper(9)", "--method", "gamma")
    second = run("limit", "paper(9)", "--method", "gamma")
    assert first == second


def test_precision_changes_digits(run):
    _, low = run_json(run, "limit", "paper(1)", "--precision", "64")
    _, high = run_json(run, "limit", "paper(1)", "--precision", "256")
    assert len(high["value_decimal"]) > len(low["value_decimal"])
    assert high["precision_bits"] == 256


def test_argument_errors_exit_2(run):
    with pytest.raises(SystemExit) as info:
        run("eval", "paper(1)", "--precision", "4")
    assert info.value.code == 2


def test_k_range():
    assert parse_k_range("2..5") == [2, 3, 4, 5]
    assert parse_k_range("7") == [7]


def test_environment_supplies_defaults(run, monkeypatch):
    monkeypatch.setenv("PRODLAB_OUTPUT_FORMAT", "text")
    monkeypatch.setenv("PRODLAB_PRECISION_BITS", "64")
    code, out = run("limit", "paper(1)")
    assert code == 0
    assert "precision_bits: 64" in out.splitlines()
    code, doc = run_json(run, "limit", "paper(1)", "--format", "json")
    assert doc["precision_bits"] == 64


@pytest.mark.slow
def test_claims_dir_from_environment(run, monkeypatch):
    monkeypatch.setenv("PRODLAB_CLAIMS_DIR", "tests/data/mutations")
    code, doc = run_json(run, "verify")
    assert code == 1
    assert doc["total"] == 9
    assert doc["verified"] == 0


def test_eval_invalid_utf8_file(run, tmp_path):
    bad = tmp_path / "latin1.prod"
    bad.write_bytes(b"paper(1) \xff")
    code, doc = run_json(run, "eval", str(bad))
    assert code == 2
    assert doc["error"] == "parse-error"
    assert "0xff" in doc["message"]


def test_verify_invalid_utf8_file(run, tmp_path):
    bad = tmp_path / "latin1.claim"
    bad.write_bytes(b"claim { lhs = paper(1);\n rhs = \xe9 paper(6); }")
    code, doc = run_json(run, "verify", str(bad))
    assert code == 2
    assert doc["verdict"] == "parse-error"


@pytest.mark.parametrize("flag", ["--periods", "--levels"])
def test_limit_rejects_zero_extrapolation_counts(run, flag):
    with pytest.raises(SystemExit) as info:
        run("limit", "paper(1)", "--method", "extrapolate", flag, "0")
    assert info.value.code == 2


def test_verify_wallis_boundary_claim(run, tmp_path):
    claim = tmp_path / "shifted.claim"
    claim.write_text("claim { lhs = paper(1); rhs = const(2) * wallis{period=2; num=[4,2]; den=[3,3]}; }")
    code, doc = run_json(run, "verify", str(claim))
    assert code == 0
    assert doc["detail"] == "structural, residual 1/2"
