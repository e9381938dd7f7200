"""
End-to-end tests of the orliczlab command line, run in-process.

Reports land in the temporary directory set up by conftest; every test reads
the report back from the path printed on stdout.
"""

import json
from pathlib import Path

import pandas as pd
import pytest

pytestmark = pytest.mark.acceptance

QUADRATIC = ["--family", "power", "--p", "2"]


def report_path(out: str) -> Path:
    """The path after the arrow on the single stdout line."""
    lines = out.strip().splitlines()
    assert len(lines) == 1, out
    return Path(lines[0].rsplit(" -> ", 1)[1])


def load_report(out: str) -> dict:
    return json.loads(report_path(out).read_text(encoding="utf-8"))


class TestSingleRuns:
    def test_conjugate_report(self, run_cli, tmp_path):
        code, out, _ = run_cli(["orlicz", "conjugate", *QUADRATIC, "--s", "0,1,2"])
        assert code == 0
        assert out.startswith("orlicz.conjugate [ok]")
        path = report_path(out)
        assert path.parent == tmp_path / "reports"

        report = load_report(out)
        assert report["tool"]["name"] == "OrliczLab"
        assert report["command"] == "orlicz.conjugate"
        assert report["status"] == "ok"
        assert len(report["config_hash"]) == 64
        assert path.name == f"orlicz.conjugate-{report['config_hash'][:12]}.json"
        assert "output" not in report["config"]
        assert report["config"]["params"]["tol"] == 1e-9
        values = [row["value"] for row in report["result"]["data"]["values"]]
        assert values == pytest.approx([0.0, 0.25, 1.0], abs=1e-6)

    def test_infinite_conjugate_is_written_as_a_string(self, run_cli):
        code, out, _ = run_cli(["orlicz", "conjugate", "--family", "linear", "--s", "0.5,2"])
        assert code == 0
        rows = load_report(out)["result"]["data"]["values"]
        assert rows[1]["value"] == "inf"
        assert rows[1]["infinite"] is True

    def test_identical_runs_write_identical_bytes(self, run_cli, tmp_path):
        argv = ["orlicz", "delta2", "--family", "power", "--p", "3"]
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(["--output", str(first), *argv])[0] == 0
        assert run_cli(["--output", str(second), *argv])[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_csv_projection(self, run_cli):
        code, out, _ = run_cli(["--format", "csv", "orlicz", "conjugate", "--family", "linear", "--s", "0.5,2"])
        assert code == 0
        path = report_path(out)
        assert path.suffix == ".csv"
        frame = pd.read_csv(path)
        assert list(frame["s"]) == [0.5, 2.0]
        assert str(frame["value"][1]) == "inf"

    def test_config_document_with_flag_override(self, run_cli, write_json):
        config = write_json(
            "run.json",
            {"command": "orlicz.delta2", "phi": {"family": "power", "params": [3]}, "params": {"t0": 1, "t_max": 1e6}},
        )
        code, out, _ = run_cli(["--config", str(config), "orlicz", "delta2", "--tmax", "100"])
        assert code == 0
        params = load_report(out)["config"]["params"]
        assert params["t_max"] == 100.0
        assert params["t0"] == 1.0

    def test_config_document_alone(self, run_cli, write_json):
        config = write_json(
            "run.json",
            {"command": "fn.norm", "phi": {"family": "power", "params": [2]}, "params": {"function": [[1, 4, 2.0], [1, 1, 0.0]]}},
        )
        code, out, _ = run_cli(["--config", str(config)])
        assert code == 0
        assert load_report(out)["result"]["data"]["norm"] == pytest.approx(1.0, abs=1e-8)

    def test_logs_stay_off_stdout(self, run_cli):
        code, out, err = run_cli(["--log-level", "INFO", "orlicz", "validate", *QUADRATIC])
        assert code == 0
        assert len(out.strip().splitlines()) == 1
        assert "Starting OrliczLab" in err


class TestExitCodes:
    def test_nonconvex_validate_fails_the_check(self, run_cli):
        code, out, _ = run_cli(["orlicz", "validate", "--family", "piecewise-linear", "--knots", "0:0,1:2,2:3"])
        assert code == 2
        assert "[check-failed]" in out
        assert load_report(out)["result"]["data"]["violation"] == "convexity"

    def test_quadratic_build_exhausts_the_search(self, run_cli):
        code, out, _ = run_cli(["counterexample", "build", *QUADRATIC, "--nmax", "10"])
        assert code == 2
        assert "[error]" in out
        assert "(param: n, exit 2)" in out
        result = load_report(out)["result"]
        assert result["error_code"] == "SEARCH_EXHAUSTED"
        assert "proved impossible" in result["data"]["witness"]

    def test_closed_bound_without_its_premise(self, run_cli):
        argv = ["cesaro", "closedbound", *QUADRATIC, "--seq", "dyadic-blocks", "--normalize", "--K", "16", "--N", "4"]
        code, out, _ = run_cli(argv)
        assert code == 2
        assert "premise not met" in out

    def test_negative_dual_point_is_an_input_error(self, run_cli):
        code, out, err = run_cli(["orlicz", "conjugate", *QUADRATIC, "--s", "-1"])
        assert code == 3
        assert out == ""
        assert "orliczlab: error: s:" in err

    @pytest.mark.parametrize(
        "argv, param",
        [
            (["orlicz", "conjugate", "--bogus"], "arguments"),
            (["orlicz", "conjugate", "--family", "cubic"], "phi.family"),
            (["orlicz", "conjugate", *QUADRATIC, "--tol", "0"], "tol"),
            (["counterexample", "mc", "--family", "linear"], "seed"),
            (["orlicz"], "command"),
            ([], "command"),
        ],
    )
    def test_input_errors_name_the_parameter(self, run_cli, argv, param):
        code, _, err = run_cli(argv)
        assert code == 3
        assert f"orliczlab: error: {param}:" in err

    def test_unstabilized_rows_are_an_input_error(self, run_cli):
        argv = ["dh", "test", "--family", "power-log", "--p", "1", "--blocks", "singleton-powers", "--N", "6", "--M", "10"]
        code, out, _ = run_cli(argv)
        assert code == 3
        assert "(param: N, exit 3)" in out

    def test_norm_below_the_bracket_floor_is_numerical(self, run_cli):
        argv = ["fn", "norm", "--family", "linear", "--function", "1/10000000000:1e-295,1:0"]
        code, out, _ = run_cli(argv)
        assert code == 4
        assert load_report(out)["result"]["error_code"] == "NUMERICAL_OVERFLOW"

    def test_unwritable_output(self, run_cli, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run_cli(["--output", str(blocker / "r.json"), "orlicz", "validate", *QUADRATIC])
        assert code == 3
        assert "orliczlab: error: output:" in err


class TestVerify:
    def test_verify_a_build_report(self, run_cli):
        code, out, _ = run_cli(["counterexample", "build", "--family", "linear", "--nmax", "20"])
        assert code == 0
        build_report = report_path(out)

        code, out, _ = run_cli(["--verify", str(build_report)])
        assert code == 0
        assert out.startswith("counterexample.verify [ok]")
        assert load_report(out)["result"]["data"]["passed"] is True

    def test_tampered_certificate_fails(self, run_cli, write_json):
        code, out, _ = run_cli(["counterexample", "build", "--family", "linear", "--nmax", "20"])
        assert code == 0
        certificate = load_report(out)["result"]["data"]["certificate"]
        certificate["a"][2] *= 1.5
        path = write_json("tampered.json", certificate)

        code, out, _ = run_cli(["counterexample", "verify", "--certificate", str(path)])
        assert code == 2
        assert "[check-failed]" in out

    def test_missing_certificate_file(self, run_cli, tmp_path):
        code, out, _ = run_cli(["--verify", str(tmp_path / "absent.json")])
        assert code == 3
        assert "(param: certificate, exit 3)" in out


class TestSweep:
    def test_sweep_aggregates_one_row_per_run(self, run_cli, write_json):
        configs = [
            {"command": "orlicz.conjugate", "phi": {"family": "power", "params": [2]}, "params": {"s": [s]}}
            for s in (1.0, 2.0, 4.0)
        ]
        code, out, _ = run_cli(["sweep", "--configs", str(write_json("sweep.json", configs))])
        assert code == 0
        path = report_path(out)
        assert path.name.startswith("sweep.orlicz.conjugate-")
        assert path.suffix == ".csv"
        frame = pd.read_csv(path)
        assert list(frame["index"]) == [0, 1, 2]
        assert list(frame["params.s"]) == ["[1.0]", "[2.0]", "[4.0]"]
        assert set(frame["status"]) == {"ok"}
        assert "phi.family" not in frame.columns

    def test_sweep_with_a_failing_run(self, run_cli, write_json):
        configs = [
            {"command": "orlicz.validate", "phi": {"family": "power", "params": [2]}},
            {"command": "orlicz.validate", "phi": {"family": "piecewise-linear", "knots": [[0, 0], [1, 2], [2, 3]]}},
        ]
        code, out, _ = run_cli(["--format", "json", "sweep", "--configs", str(write_json("sweep.json", configs))])
        assert code == 2
        report = load_report(out)
        assert report["result"]["data"] == {"runs": 2, "failures": 1}

    def test_empty_sweep(self, run_cli, write_json):
        code, out, _ = run_cli(["sweep", "--configs", str(write_json("empty.json", []))])
        assert code == 0
        assert "empty sweep" in out

    def test_invalid_entry_is_located(self, run_cli, write_json):
        configs = [
            {"command": "orlicz.validate", "phi": {"family": "power", "params": [2]}},
            {"command": "orlicz.validate"},
        ]
        code, _, err = run_cli(["sweep", "--configs", str(write_json("sweep.json", configs))])
        assert code == 3
        assert "configs[1]" in err

    def test_mixed_commands_are_rejected(self, run_cli, write_json):
        configs = [
            {"command": "orlicz.validate", "phi": {"family": "power", "params": [2]}},
            {"command": "orlicz.delta2", "phi": {"family": "power", "params": [2]}},
        ]
        code, _, _ = run_cli(["sweep", "--configs", str(write_json("sweep.json", configs))])
        assert code == 3
