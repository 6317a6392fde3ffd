"""Tests for the report writers and the worker pool."""

import csv
import json

import numpy as np
import pytest

from brittlehom.errors import ConfigError
from brittlehom.output import TRACE_COLUMNS, canonical, dumps, write_json, write_trace
from brittlehom.workers import THREADS_ENV, parallel_map, worker_count


class TestCanonical:
    """Tests for canonical and dumps."""

    def test_numpy_values(self):
        """numpy scalars and arrays become plain Python values."""
        data = canonical({"a": np.float64(0.5), "b": np.arange(2), "c": np.bool_(1)})
        assert data == {"a": 0.5, "b": [0, 1], "c": True}
        assert type(data["b"][0]) is int

    def test_sorted_keys(self):
        """Keys are sorted and the text ends with a newline."""
        text = dumps({"b": 1, "a": 2})
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("}\n")

    def test_float_round_trip(self):
        """Floats survive at full precision."""
        assert json.loads(dumps({"x": 0.1 + 0.2}))["x"] == 0.1 + 0.2


class TestWriters:
    """Tests for the atomic writers."""

    def test_write_json(self, tmp_path):
        """The report lands at the target path and nothing else is left behind."""
        path = tmp_path / "out" / "report.json"
        write_json(path, {"value": 1.5})
        assert json.loads(path.read_text())["value"] == 1.5
        assert [p.name for p in path.parent.iterdir()] == ["report.json"]

    def test_failed_write_keeps_target(self, tmp_path):
        """An unserializable report leaves the previous file in place."""
        path = tmp_path / "report.json"
        write_json(path, {"value": 1})
        with pytest.raises(TypeError):
            write_json(path, {"value": object()})
        assert json.loads(path.read_text()) == {"value": 1}

    def test_write_trace(self, tmp_path):
        """Traces carry the fixed header and full-precision floats."""
        path = tmp_path / "trace.csv"
        write_trace(path, [[1, 1 / 3, 0.25, 0.0, 0.0, ""]])
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_COLUMNS
        assert float(rows[1][1]) == 1 / 3


class TestWorkers:
    """Tests for worker_count and parallel_map."""

    def test_unset_uses_all_cores(self, monkeypatch):
        """Without the variable every core is used."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert worker_count() >= 1

    def test_explicit_count(self, monkeypatch):
        """A positive value caps the pool."""
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count() == 3

    @pytest.mark.parametrize("raw", ["many", "-1"])
    def test_invalid(self, monkeypatch, raw):
        """Non-integer or negative values are configuration errors."""
        monkeypatch.setenv(THREADS_ENV, raw)
        with pytest.raises(ConfigError, match=THREADS_ENV):
            worker_count()

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_order_preserved(self, monkeypatch, threads):
        """Results come back in input order."""
        monkeypatch.setenv(THREADS_ENV, threads)
        assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_empty_input(self):
        """No items, no results."""
        assert parallel_map(str, []) == []
