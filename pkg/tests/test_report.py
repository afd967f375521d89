"""Deterministic CSV rendering of result rows and tables.

TestResultRow   field formatting and provenance validation
TestHashing     canonical config hashes
TestRendering   headers, bodies, timestamp stripping, file round trips
"""

import math

import numpy as np
import pytest

from sectorsum.report import (ROW_COLUMNS, ResultRow, config_hash,
                              format_value, render_rows, render_table,
                              strip_timestamp, write_rows_csv,
                              write_table_csv)


def _row(metric="defect", value=1.5e-9, passed=True):
    return ResultRow(suite="opsum", case="diag2", metric=metric,
                     value=value, tolerance=1e-8, passed=passed)


class TestResultRow:
    """CSV field emission and provenance tags."""

    def test_fields_split_complex(self):
        r = ResultRow(suite="s", case="c", metric="m", value=1.0 - 2.0j,
                      tolerance=0.5, passed=True, provenance="trivial")
        fields = r.csv_fields()
        assert fields == ("s", "c", "m", "1.0", "-2.0", "0.5", "pass",
                          "trivial")

    def test_fail_marker(self):
        assert _row(passed=False).csv_fields()[6] == "FAIL"

    def test_provenance_validated(self):
        for tag in ("paper_table", "trivial", "derived_oracle"):
            ResultRow(suite="s", case="c", metric="m", value=0.0,
                      tolerance=1.0, passed=True, provenance=tag)
        with pytest.raises(ValueError):
            ResultRow(suite="s", case="c", metric="m", value=0.0,
                      tolerance=1.0, passed=True, provenance="guessed")


class TestHashing:
    """The config hash is canonical over key order."""

    def test_order_invariance(self):
        a = config_hash({"suite": "opsum", "seed": 42, "tol": 1e-8})
        b = config_hash({"tol": 1e-8, "suite": "opsum", "seed": 42})
        assert a == b and len(a) == 16
        int(a, 16)  # hex

    def test_sensitivity(self):
        a = config_hash({"seed": 42})
        b = config_hash({"seed": 43})
        assert a != b


class TestFormatting:
    """format_value is repr-stable and type-aware."""

    def test_values(self):
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(np.bool_(True)) == "true"
        assert format_value(3) == "3"
        assert format_value(np.int64(-4)) == "-4"
        assert format_value(math.nan) == "nan"
        assert format_value(0.1) == "0.1"
        assert format_value(np.float64(2.5)) == "2.5"


class TestRendering:
    """Header contract, bodies, and timestamp stripping."""

    def test_header_and_body(self):
        text = render_rows([_row()], suite="opsum", seed=42,
                           cfg_hash="ab" * 8, tol_scale=1.0)
        lines = text.splitlines()
        assert lines[0] == ("# sectorsum suite=opsum seed=42 "
                            "config_sha256=" + "ab" * 8 + " tol_scale=1.0")
        assert lines[1].startswith("# timestamp=")
        assert lines[2] == ",".join(ROW_COLUMNS)
        assert lines[3].startswith("opsum,diag2,defect,")
        assert text.endswith("\n")

    def test_strip_timestamp(self):
        text = render_rows([_row()], suite="opsum", seed=1, cfg_hash="00")
        stripped = strip_timestamp(text)
        assert "# timestamp=" not in stripped
        # everything except that one line survives
        assert stripped == "\n".join(
            ln for ln in text.splitlines()
            if not ln.startswith("# timestamp=")) + "\n"

    def test_stamp_disabled(self):
        text = render_rows([_row()], suite="opsum", seed=1, cfg_hash="00",
                           stamp=False)
        assert "# timestamp=" not in text
        assert strip_timestamp(text) == text

    def test_rows_file_round_trip(self, tmp_path):
        path = tmp_path / "rows.csv"
        text = write_rows_csv(path, [_row()], suite="opsum", seed=7,
                              cfg_hash="11")
        assert path.read_text() == text

    def test_table_rendering(self, tmp_path):
        cols = ("case", "dpg_bound", "ok")
        recs = [{"case": "diag2", "dpg_bound": 1.25, "ok": True}]
        text = render_table(cols, recs, suite="opsum", seed=7, cfg_hash="11")
        lines = text.splitlines()
        assert lines[2] == "case,dpg_bound,ok"
        assert lines[3] == "diag2,1.25,true"
        path = tmp_path / "table.csv"
        assert write_table_csv(path, cols, recs, suite="opsum", seed=7,
                               cfg_hash="11") == path.read_text()
