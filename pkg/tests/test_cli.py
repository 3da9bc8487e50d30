"""Command-line interface: configuration resolution, output formats,
exit statuses, and the report record."""

import json
import math

import pytest

from qvirasoro.cli import DEFAULTS, SUITES, main
from qvirasoro.report import CheckReport, worst


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_runtime(records):
    return [{k: v for k, v in r.items() if k != "runtime_ms"} for r in records]


class TestExitStatus:
    def test_pass_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "qspecial")
        assert code == 0
        assert "[PASS]" in out

    def test_failure_is_one(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--suite", "qspecial", "--tol", "1e-30"
        )
        assert code == 1
        assert "[FAIL]" in out

    def test_inconclusive_is_two(self, capsys):
        # L = 3 pushes the lattice exponent b below zero
        code, out, _ = run_cli(
            capsys, "verify", "--suite", "four-point", "--L", "3.0"
        )
        assert code == 2
        assert "[INCONCLUSIVE]" in out

    def test_equal_deformation_parameters_are_refused(self, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--suite", "qspecial", "--q", "0.5", "--t", "0.5"
        )
        assert code == 3
        assert "q = t is excluded" in err

    def test_unknown_suite_lists_names(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--suite", "nonsense")
        assert code == 3
        assert "valid names" in err
        for name in ("defining-relation", "connection", "qspecial"):
            assert name in err

    def test_degree_window_consistency(self, capsys):
        code, _, err = run_cli(
            capsys, "verify", "--suite", "qspecial", "--degree", "2", "--window", "4"
        )
        assert code == 3
        assert "degree cap" in err

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 3


class TestJson:
    def test_record_schema(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "qspecial", "--json")
        assert code == 0
        records = json.loads(out)
        assert len(records) == 1
        rec = records[0]
        assert set(rec) == {
            "identity",
            "pass",
            "residual",
            "tolerance",
            "worst_location",
            "params",
            "truncation",
            "runtime_ms",
        }
        assert set(rec["params"]) == {"q", "t", "ell", "k", "L", "r", "seed"}
        assert set(rec["truncation"]) == {"degree", "window"}
        assert rec["identity"] == "qspecial"
        assert rec["pass"] is True
        # default period resolves to 1/beta = log q / log t = 2
        assert rec["params"]["r"] == pytest.approx(2.0)
        assert rec["params"]["seed"] == DEFAULTS["seed"]

    def test_inconclusive_has_infinite_residual(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--suite", "four-point", "--L", "3.0", "--json"
        )
        assert code == 2
        rec = json.loads(out)[0]
        assert rec["pass"] is False
        assert math.isinf(rec["residual"])

    def test_deterministic_modulo_runtime(self, capsys):
        argv = ("verify", "--suite", "delta-identity", "--seed", "777", "--json")
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv)
        assert strip_runtime(json.loads(out1)) == strip_runtime(json.loads(out2))

    def test_vertex_exchange_emits_three_records(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--suite", "vertex-exchange", "--degree", "3",
            "--window", "3", "--json",
        )
        assert code == 0
        assert [r["identity"] for r in json.loads(out)] == [
            "vertex-exchange",
            "vertex-exchange-theta",
            "vertex-exchange-mirror",
        ]


class TestCsv:
    def test_header_and_float_repr(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "qspecial", "--csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == (
            "identity,pass,residual,tolerance,worst_location,"
            "q,t,ell,k,L,r,seed,degree,window,runtime_ms"
        )
        cells = lines[1].split(",")
        assert cells[0] == "qspecial"
        assert cells[5] == "0.49"  # floats round-trip via repr
        assert float(cells[2]) <= float(cells[3])


class TestPrecedence:
    def test_config_env_flag_order(self, capsys, tmp_path, monkeypatch):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("q = 0.6\nsuite = qspecial\njson = true\n")
        # config file alone
        code, out, _ = run_cli(capsys, "verify", "--config", str(cfgfile))
        assert code == 0
        assert json.loads(out)[0]["params"]["q"] == 0.6
        # environment overrides the file
        monkeypatch.setenv("QVIR_Q", "0.55")
        _, out, _ = run_cli(capsys, "verify", "--config", str(cfgfile))
        assert json.loads(out)[0]["params"]["q"] == 0.55
        # flags override both
        _, out, _ = run_cli(capsys, "verify", "--config", str(cfgfile), "--q", "0.45")
        assert json.loads(out)[0]["params"]["q"] == 0.45

    def test_config_r_auto(self, capsys, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("r = auto\nsuite = qspecial\njson = 1\n")
        code, out, _ = run_cli(capsys, "verify", "--config", str(cfgfile))
        assert code == 0
        assert json.loads(out)[0]["params"]["r"] == pytest.approx(2.0)

    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(capsys, "verify", "--config", "/nonexistent.cfg")
        assert code == 3
        assert "cannot read config file" in err

    def test_threads_preserve_report_order(self, capsys):
        argv = ("verify", "--suite", "qspecial,delta-identity", "--json")
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv, "--threads", "2")
        assert strip_runtime(json.loads(out1)) == strip_runtime(json.loads(out2))


class TestEval:
    def test_phi21_at_origin(self, capsys):
        code, out, _ = run_cli(
            capsys, "eval", "phi21", "--a", "0.3", "--b", "0.5", "--c", "0.8",
            "--q", "0.5", "--z", "0",
        )
        assert code == 0
        assert out.strip() == "1"

    def test_bracket_requires_period(self, capsys):
        code, _, err = run_cli(capsys, "eval", "bracket", "--u", "0.4", "--q", "0.49")
        assert code == 3
        assert "--r" in err

    def test_two_point_matches_library(self, capsys):
        code, out, _ = run_cli(
            capsys, "eval", "two-point", "--q", "0.49", "--t", "0.7",
            "--z", "1", "--w", "0.4",
        )
        assert code == 0
        from qvirasoro.correlators import CorrelatorParams, two_point
        from qvirasoro.qspecial import QParams

        expected = two_point(1.0, 0.4, CorrelatorParams(params=QParams(0.49, 0.7)))
        assert float(out) == pytest.approx(expected, rel=1e-15)

    def test_pole_is_runtime_error_not_config(self, capsys):
        code, _, err = run_cli(
            capsys, "eval", "two-point", "--q", "0.49", "--t", "0.7",
            "--z", "1", "--w", str(1 / 0.49),
        )
        assert code == 1
        assert "pole" in err


class TestReportRecord:
    def test_status_derived_from_residual(self):
        assert CheckReport("x", 1e-10, 1e-8).passed
        assert CheckReport("x", 1e-6, 1e-8).status == "fail"
        assert not CheckReport("x", float("inf"), 1e-8).passed
        rep = CheckReport("x", float("inf"), 1e-8, status="inconclusive")
        assert rep.status == "inconclusive"

    def test_summary_line_and_notes(self):
        rep = CheckReport("demo", 2e-9, 1e-8, worst_location="mode 3")
        rep.add_note("extra")
        line = rep.summary_line()
        assert line.startswith("[PASS]")
        assert "demo" in line and "mode 3" in line
        assert rep.notes == ["extra"]

    def test_worst_selector(self):
        reports = [CheckReport("a", 1e-12, 1e-8), CheckReport("b", 1e-9, 1e-8)]
        assert worst(reports).identity == "b"

    def test_suite_registry_is_complete(self):
        assert len(SUITES) == 16
