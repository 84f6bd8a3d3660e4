import csv
import json

import pytest

from config import reset_settings
from main import EXIT_INPUT, EXIT_IO, EXIT_NO_CONVERGENCE, EXIT_OK, EXIT_VERIFY_FAILED, main, merge_flags


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEval:
    def test_generalized_derivative(self, capsys):
        code, out, _ = run(capsys, "eval", "--op", "gfd", "--alpha", "0.5", "--rho", "1", "--a", "0", "--f", "x", "--x", "1")
        assert code == EXIT_OK
        assert out.startswith("1.1283791671 ±")

    def test_generalized_integral(self, capsys):
        code, out, _ = run(capsys, "eval", "--op", "gfi", "--alpha", "1", "--rho", "1", "--a", "0", "--f", "1", "--x", "2")
        assert code == EXIT_OK
        assert out.startswith("2.0 ±")

    @pytest.mark.parametrize(
        "op, extra, f, x, expected",
        [
            ("hadamard-int", ["--a", "1"], "1", "2.718281828459045", "1.0 ±"),
            ("ek-int", ["--rho", "2"], "1", "1.7", "1.0 ±"),
            ("nfold", ["--alpha", "2", "--rho", "2"], "1", "1", "0.125 ±"),
        ],
    )
    def test_other_operators(self, capsys, op, extra, f, x, expected):
        argv = ["eval", "--op", op, "--alpha", "1", *extra, "--f", f, "--x", x]
        code, out, _ = run(capsys, *argv)
        assert code == EXIT_OK
        assert out.startswith(expected)

    def test_syntax_error_exits_two(self, capsys):
        code, out, err = run(capsys, "eval", "--op", "gfd", "--alpha", "0.5", "--rho", "1", "--a", "0", "--f", "x^", "--x", "1")
        assert code == EXIT_INPUT
        assert out == ""
        assert "offset 2" in err

    def test_domain_error_exits_two(self, capsys):
        code, _, err = run(capsys, "eval", "--op", "hadamard", "--alpha", "0.5", "--a", "0", "--f", "1", "--x", "1")
        assert code == EXIT_INPUT
        assert "a > 0" in err

    def test_fractional_nfold_is_rejected(self, capsys):
        code, _, _ = run(capsys, "eval", "--op", "nfold", "--alpha", "1.5", "--f", "1", "--x", "1")
        assert code == EXIT_INPUT

    def test_usage_error(self, capsys):
        code, _, _ = run(capsys, "eval", "--op", "gfd")
        assert code == 2


class TestSweep:
    def test_writes_csv_file(self, capsys, tmp_path):
        out_file = tmp_path / "fig.csv"
        code, _, _ = run(
            capsys, "sweep", "--alphas", "0.5", "--rhos", "0.4", "1.0", "--nus", "1.0",
            "--x-lo", "0.5", "--x-hi", "1.5", "--x-count", "2", "--out", str(out_file),
        )
        assert code == EXIT_OK
        lines = out_file.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# rel_tol=1e-10"
        rows = list(csv.DictReader(lines[1:]))
        assert len(rows) == 4
        assert [r["rho"] for r in rows] == ["0.40000000000000002", "0.40000000000000002", "1", "1"]
        at_one = [r for r in rows if r["rho"] == "1"]
        assert float(at_one[0]["value"]) == pytest.approx(1.1283791671 * 0.5 ** 0.5, rel=1e-5)

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps({
            "alphas": [0.9], "rhos": [1.0], "nus": [2.0],
            "x_grid": {"lo": 0.5, "hi": 1.0, "count": 2}, "operator": "gfi",
        }), encoding="utf-8")
        code, out, _ = run(capsys, "sweep", "--config", str(config), "--x-count", "3")
        assert code == EXIT_OK
        assert len(out.splitlines()) == 2 + 3

    def test_missing_config_is_io_error(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--config", str(tmp_path / "absent.json"))
        assert code == EXIT_IO

    def test_invalid_spec_is_input_error(self, capsys):
        code, _, err = run(capsys, "sweep", "--alphas", "0.5", "--rhos", "1", "--nus", "1")
        assert code == EXIT_INPUT
        assert "invalid sweep specification" in err

    def test_unwritable_output(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "sweep", "--alphas", "0.5", "--rhos", "1", "--nus", "1",
            "--x-lo", "0.5", "--x-hi", "1", "--x-count", "2", "--out", str(tmp_path / "missing" / "out.csv"),
        )
        assert code == EXIT_IO


class TestVerify:
    def test_nfold_suite_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "nfold", "--grid-count", "2")
        assert code == EXIT_OK
        reports = [json.loads(line) for line in out.splitlines()]
        assert len(reports) == 8
        assert all(r["pass"] for r in reports)

    @pytest.mark.slow
    def test_zero_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "inverse", "--tol", "0", "--grid-count", "2")
        assert code == EXIT_VERIFY_FAILED
        assert all(json.loads(line)["tolerance"] == 0.0 for line in out.splitlines())

    def test_invalid_interval(self, capsys):
        code, _, _ = run(capsys, "verify", "nfold", "--a", "2", "--b", "1")
        assert code == EXIT_INPUT

    @pytest.mark.slow
    def test_limits_report_monotone_sequence(self, capsys):
        _, out, _ = run(capsys, "verify", "limits", "--grid-count", "2")
        reports = [json.loads(line) for line in out.splitlines()]
        hadamard = [r for r in reports if r["identity_name"].startswith("hadamard_limit")]
        assert hadamard
        assert all(r["grid"] == [0.1, 0.01, 0.001] for r in hadamard)


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == EXIT_OK
    assert all(json.loads(line)["pass"] for line in out.splitlines())


def test_invalid_environment(capsys, monkeypatch):
    monkeypatch.setenv("GFRAC_WORKERS", "0")
    code, _, err = run(capsys, "selftest")
    assert code == EXIT_INPUT
    assert "GFRAC_" in err


def test_unconverged_quadrature_exits_three(capsys, monkeypatch):
    monkeypatch.setenv("GFRAC_QUAD_MAX_LEVELS", "1")
    monkeypatch.setenv("GFRAC_QUAD_TOL", "1e-15")
    monkeypatch.setenv("GFRAC_QUAD_ABS_TOL", "1e-300")
    reset_settings()
    code, out, err = run(capsys, "eval", "--op", "gfi", "--alpha", "0.5", "--a", "0.1", "--f", "sin(30*x)", "--x", "1")
    assert code == EXIT_NO_CONVERGENCE
    assert out == ""
    assert "best estimate:" in err


def test_merge_flags_prefers_given_flags():
    merged = merge_flags({"a": 1.0, "x_grid": {"lo": 0.1, "hi": 2.0}}, {"a": None, "x_grid": {"lo": 0.5, "hi": None}})
    assert merged == {"a": 1.0, "x_grid": {"lo": 0.5, "hi": 2.0}}
