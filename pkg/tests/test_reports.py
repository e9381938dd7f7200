"""Tests for canonical report rendering and atomic writes."""

import io
import json
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from src.core.dhtest import SeriesVerdict
from src.utils.reports import (
    atomic_write,
    build_report,
    default_report_path,
    render_csv,
    render_json,
    to_jsonable,
    write_report,
)
from src.version import get_tool_info


def sample_report(**overrides):
    report = build_report(
        command="orlicz.conjugate",
        config={"command": "orlicz.conjugate", "params": {"s": [1.0]}},
        config_digest="ab" * 32,
        status="ok",
        summary="phi* at 1 point",
        result={"success": True, "exit_code": 0, "data": {"value": float("inf")}},
    )
    report.update(overrides)
    return report


class TestToJsonable:
    @pytest.mark.parametrize(
        "value, expected",
        [
            (float("inf"), "inf"),
            (float("-inf"), "-inf"),
            (float("nan"), "nan"),
            (Fraction(3, 8), "3/8"),
            (Fraction(2), "2/1"),
            (SeriesVerdict.DIVERGENT, "divergent-trend"),
            (np.float64(0.5), 0.5),
            (np.int64(7), 7),
            (np.bool_(True), True),
            ((1, Fraction(1, 2)), [1, "1/2"]),
        ],
    )
    def test_scalars(self, value, expected):
        assert to_jsonable(value) == expected

    def test_nested_containers(self):
        converted = to_jsonable({1: np.array([1.0, np.inf]), "x": {"y": (Fraction(1, 3),)}})
        assert converted == {"1": [1.0, "inf"], "x": {"y": ["1/3"]}}

    def test_bools_stay_bools(self):
        assert to_jsonable(True) is True


class TestRendering:
    def test_json_is_canonical(self):
        text = render_json(sample_report())
        assert text.endswith("}\n")
        document = json.loads(text)
        assert list(document) == sorted(document)
        assert document["result"]["data"]["value"] == "inf"
        assert document["tool"] == get_tool_info()
        assert text == render_json(json.loads(text))

    def test_key_order_does_not_matter(self):
        a = sample_report()
        b = dict(reversed(list(a.items())))
        assert render_json(a) == render_json(b)

    def test_csv_encodes_nested_values(self):
        text = render_csv([
            {"n": 1, "value": Fraction(1, 2), "pair": [1, 2]},
            {"n": 2, "value": float("inf"), "pair": {"b": 1, "a": 2}},
        ])
        frame = pd.read_csv(io.StringIO(text), keep_default_na=False)
        assert list(frame.columns) == ["n", "value", "pair"]
        assert list(frame["value"]) == ["1/2", "inf"]
        assert list(frame["pair"]) == ["[1, 2]", '{"a": 2, "b": 1}']
        assert "\r" not in text


class TestWriting:
    def test_default_path(self, tmp_path):
        path = default_report_path(str(tmp_path), "dh.table", "0123456789abcdef", "csv")
        assert path == tmp_path / "dh.table-0123456789ab.csv"

    def test_atomic_write_creates_directories(self, tmp_path):
        target = tmp_path / "nested" / "deeper" / "r.json"
        atomic_write(target, "{}\n")
        assert target.read_text() == "{}\n"
        assert list(target.parent.iterdir()) == [target]

    def test_failed_write_leaves_no_temp_file(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            atomic_write(blocker / "r.json", "{}")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["file"]

    def test_overwrite_replaces_content(self, tmp_path):
        target = tmp_path / "r.json"
        atomic_write(target, "old")
        atomic_write(target, "new")
        assert target.read_text() == "new"
        assert not (tmp_path / "r.json.tmp").exists()

    def test_json_report(self, tmp_path):
        path = write_report(sample_report(), [], "json", tmp_path / "r.json")
        assert json.loads(path.read_text())["command"] == "orlicz.conjugate"

    def test_csv_rows(self, tmp_path):
        rows = [{"s": 1.0, "value": 0.25}, {"s": 2.0, "value": 1.0}]
        path = write_report(sample_report(), rows, "csv", tmp_path / "r.csv")
        frame = pd.read_csv(path)
        assert list(frame["value"]) == [0.25, 1.0]

    def test_csv_without_rows_falls_back_to_the_summary(self, tmp_path):
        report = sample_report(
            status="error",
            summary="certificate: no such file",
            result={"success": False, "exit_code": 3, "error_code": "INVALID_INPUT", "param": "certificate"},
        )
        path = write_report(report, [], "csv", tmp_path / "r.csv")
        frame = pd.read_csv(path)
        assert len(frame) == 1
        row = frame.iloc[0]
        assert row["status"] == "error"
        assert row["error_code"] == "INVALID_INPUT"
        assert row["param"] == "certificate"
        assert row["exit_code"] == 3
