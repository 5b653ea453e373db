"""
工具函数测试: 数值格式、CSV/JSON 输出与网格
"""

import json
import math

import numpy as np
import pytest

from src.utils import (
    dumps_json,
    format_number,
    linear_grid,
    log_grid,
    mixed_grid,
    parse_csv,
    render_csv,
    write_text,
)


def test_format_number_shortest_round_trip():
    assert format_number(0.1) == "0.1"
    assert format_number(np.float64(1e-300)) == "1e-300"
    assert format_number(True) == "true"
    assert format_number(np.int64(7)) == "7"
    assert format_number(None) == "nan"
    value = math.pi / 7
    assert float(format_number(value)) == value


def test_render_and_parse_csv():
    text = render_csv(["x", "name"], [[0.5, "gordon_lower"], [2.0, None]])
    assert text == "x,name\n0.5,gordon_lower\n2.0,nan\n"
    assert parse_csv(text) == {"x": ["0.5", "2.0"], "name": ["gordon_lower", "nan"]}


def test_dumps_json_keeps_key_order_and_drops_nonfinite():
    text = dumps_json({"b": 1, "a": float("nan"), "c": (np.float64(0.25),)})
    assert list(json.loads(text)) == ["b", "a", "c"]
    assert json.loads(text)["a"] is None
    assert text.endswith("\n")


def test_write_text_creates_parent(tmp_path):
    path = tmp_path / "nested" / "out.csv"
    write_text("a\n1\n", path)
    assert path.read_bytes() == b"a\n1\n"


def test_write_text_to_stdout(capsys):
    write_text("a\n1\n", None)
    assert capsys.readouterr().out == "a\n1\n"


def test_linear_grid_includes_endpoint():
    grid = linear_grid(0.1, 1.5, 0.1)
    assert len(grid) == 15
    assert grid[2] == 0.3
    assert grid[-1] == 1.5


def test_log_grid_points_per_decade():
    grid = log_grid(1e-12, 1e-2, 10)
    assert len(grid) == 101
    assert np.allclose(grid[[0, -1]], [1e-12, 1e-2], rtol=1e-12)
    assert len(log_grid(1e-4, 1e-3, 1)) == 2


def test_mixed_grid_sorted_unique():
    grid = mixed_grid(40.0, 200, 1e-3)
    assert grid[0] == pytest.approx(1e-3, rel=1e-12)
    assert grid[-1] == 40.0
    assert np.all(np.diff(grid) > 0)
    assert 190 <= len(grid) <= 200
