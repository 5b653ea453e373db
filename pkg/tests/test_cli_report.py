"""
报告与命令行测试: 表格内容、校验、确定性、CSV 往返与验证套件
"""

import json
import math

import pytest
from click.testing import CliRunner

from main import cli
from src import bounds
from src.bounds import BoundId
from src.cli_report import (
    CommandConfig,
    CsvTable,
    cmd_bounds_table,
    cmd_conjecture_scan,
    cmd_inverse_table,
    cmd_verify,
)
from src.errors import ConfigError
from src.gauss_core import tail_integral
from src.operation_middleware import OperationMiddleware
from src.utils import parse_csv


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def quiet_middleware():
    return OperationMiddleware(color_output=False, show_details=False)


def test_bounds_table_small_x():
    config = CommandConfig.for_figure("bounds-table", "fig1", bounds=["gordon", "thm3"])
    table = cmd_bounds_table(config)
    assert len(table.rows) == 15
    assert table.header == ["x", "reference",
                            "gordon_lower", "gordon_lower_valid",
                            "gordon_upper", "gordon_upper_valid",
                            "thm3_lower", "thm3_lower_valid",
                            "thm3_upper", "thm3_upper_valid"]
    assert table.column("x")[0] == 0.1 and table.column("x")[-1] == 1.5

    row = dict(zip(table.header, table.rows[table.column("x").index(1.4)]))
    for name in ("thm3_lower", "thm3_upper"):
        assert abs(row[name] / row["reference"] - 1.0) <= 0.08
    assert row["thm3_lower_valid"] is False
    assert row["thm3_upper_valid"] is True


def test_bounds_table_normalized_ordering():
    config = CommandConfig("bounds-table", x_min=1.5, x_max=6.0, step=0.5,
                           bounds=["bs", "thm3"], normalized=True)
    table = cmd_bounds_table(config)
    assert len(table.rows) == 10
    assert all(v == pytest.approx(1.0, rel=1e-15) for v in table.column("reference"))
    for bs_lower, thm3_lower in zip(table.column("bs_lower"), table.column("thm3_lower")):
        assert 0.98 < thm3_lower < 1.0
        assert bs_lower < thm3_lower


def test_bounds_table_q_scale():
    config = CommandConfig("bounds-table", x_min=1.0, x_max=2.0, step=1.0,
                           bounds=["gordon_upper"], q_scale=True)
    table = cmd_bounds_table(config)
    assert table.column("reference")[1] == pytest.approx(0.022750131948179, rel=1e-12)


@pytest.mark.parametrize("overrides, message", [
    (dict(bounds=[]), "至少需要"),
    (dict(bounds=["chernoff"]), "未知的界"),
    (dict(x_min=0.0), "--x-min"),
    (dict(x_max=41.0), "--x-max"),
    (dict(x_min=2.0, x_max=1.0), "--x-min < --x-max"),
    (dict(step=-0.1), "--step"),
    (dict(normalized=True, q_scale=True), "--q-scale"),
    (dict(fmt="xml"), "--format"),
])
def test_bounds_table_validation(overrides, message):
    config = CommandConfig.for_figure("bounds-table", "fig1", **overrides)
    with pytest.raises(ConfigError, match=message):
        cmd_bounds_table(config)


def test_validation_collects_all_errors():
    config = CommandConfig("bounds-table", x_min=-1.0, x_max=50.0, step=0.0, bounds=[])
    with pytest.raises(ConfigError) as info:
        config.validate()
    assert len(info.value.errors) == 4


def test_inverse_table_explicit_alphas():
    table = cmd_inverse_table(CommandConfig("inverse-table", alphas=[1e-3, 1e-6]))
    assert table.header == ["alpha", "reference", "est_low1", "est_low2", "est_upp",
                            "cert_lower", "cert_upper"]
    first = dict(zip(table.header, table.rows[0]))
    assert first["reference"] == pytest.approx(3.0902323, abs=1e-6)
    assert first["est_low1"] == pytest.approx(3.08130, abs=1e-4)
    assert first["est_upp"] == pytest.approx(3.06828, abs=1e-4)
    assert first["cert_upper"] == pytest.approx(3.101, abs=1e-3)

    second = dict(zip(table.header, table.rows[1]))
    assert (second["reference"] - second["est_low1"]) / second["reference"] <= 1.2e-3


def test_inverse_table_range():
    config = CommandConfig.for_figure("inverse-table", "fig4")
    table = cmd_inverse_table(config)
    assert len(table.rows) == 81
    alphas = table.column("alpha")
    assert alphas == sorted(alphas)


def test_inverse_table_rejects_large_alpha():
    with pytest.raises(ConfigError, match="小 α"):
        cmd_inverse_table(CommandConfig("inverse-table", alpha_min=1e-4, alpha_max=0.5,
                                        points_per_decade=2))


def test_conjecture_report_structure():
    payload = cmd_conjecture_scan(CommandConfig.for_figure("conjecture-scan", "scan"))
    assert list(payload) == ["grid", "results"]
    assert [item["name"] for item in payload["results"]] == ["low1", "low2", "upp"]
    assert list(payload["results"][0]) == ["name", "relation", "holds_at", "violations",
                                           "non_evaluable", "empirical_range"]
    low1, _, upp = payload["results"]
    assert low1["violations"] == []
    assert upp["violations"]
    assert set(upp["violations"][0]) == {"alpha", "estimate", "reference"}


def test_conjecture_report_two_points():
    payload = cmd_conjecture_scan(CommandConfig("conjecture-scan", alpha_min=1e-4,
                                                alpha_max=1e-3, points_per_decade=1))
    assert payload["grid"]["size"] == 2


def test_csv_table_arity():
    with pytest.raises(ValueError):
        CsvTable(["a", "b"], [[1.0]])
    table = CsvTable(["a", "b"])
    with pytest.raises(ValueError):
        table.add_row([1, 2, 3])


def test_cli_bounds_table_round_trip(runner, tmp_path):
    out = tmp_path / "fig2.csv"
    result = runner.invoke(cli, ["bounds-table", "--figure", "fig2", "--bounds", "all",
                                 "--out", str(out)])
    assert result.exit_code == 0, result.output

    text = out.read_text(encoding="utf-8")
    assert text.endswith("\n") and "\r" not in text
    columns = parse_csv(text)
    assert len(columns["x"]) == 10
    for x, reference in zip(columns["x"], columns["reference"]):
        expected = tail_integral(float(x)).linear
        assert abs(float(reference) - expected) <= 1e-12 * expected
    assert set(columns["thm3_lower_valid"]) == {"true"}


def test_cli_output_is_deterministic(runner, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        result = runner.invoke(cli, ["inverse-table", "--alpha-min", "1e-8", "--alpha-max", "1e-2",
                                     "--points-per-decade", "2", "--out", str(path)])
        assert result.exit_code == 0, result.output
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_cli_conjecture_scan_json(runner, tmp_path):
    out = tmp_path / "scan.json"
    result = runner.invoke(cli, ["conjecture-scan", "--alpha-min", "1e-4", "--alpha-max", "1e-3",
                                 "--points-per-decade", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["grid"]["size"] == 2


def test_cli_config_error_exit_code(runner):
    result = runner.invoke(cli, ["inverse-table", "--alpha", "0.5"])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["bounds-table", "--bounds", ","])
    assert result.exit_code == 2


def test_cli_single_evaluations(runner):
    result = runner.invoke(cli, ["eval", "inverse", "1e-3"])
    assert result.exit_code == 0
    assert float(result.output.strip()) == pytest.approx(3.0902323, abs=1e-6)

    result = runner.invoke(cli, ["bound", "thm3_lower", "1.0"])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["bound", "thm3_lower", "1.0", "--force"])
    assert result.exit_code == 0

    result = runner.invoke(cli, ["eval", "q", "-1"])
    assert result.exit_code == 2


def test_cli_catalog(runner):
    result = runner.invoke(cli, ["catalog", "--format", "json"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert [row["id"] for row in payload["rows"]] == [b.value for b in BoundId]


def test_verify_coarse_grid_passes(quiet_middleware):
    outcome = cmd_verify(CommandConfig("verify", grid_points=50), quiet_middleware)
    assert outcome.exit_status == 0, outcome.failures()
    assert len(outcome.families) == 9
    assert all(line.startswith("[PASS]") for line in outcome.summary_lines()[:9])
    # 猜想违反不影响退出码
    assert outcome.conjecture["results"][2]["violations"]


def test_verify_detects_corrupted_bound(monkeypatch, quiet_middleware):
    # 上界整体缩小 e^(-0.5) 倍后在大 x 处低于参考值
    monkeypatch.setitem(bounds._LOG_PREFACTORS, BoundId.GORDON_UPPER,
                        lambda x: -math.log(x) - 0.5)
    outcome = cmd_verify(CommandConfig("verify", grid_points=50), quiet_middleware)
    assert outcome.exit_status == 1
    failed = [family.name for family in outcome.families if not family.passed]
    assert "gordon" in failed
    failures = outcome.failures()
    assert 0 < len(failures) <= 10
    assert any("gordon_upper" in line for line in failures)


def _shrink_new_upper_bound(monkeypatch):
    # 新上界缩小 e^(-0.5) 倍: 夹逼在大 x 处失败，经验交叉点区间两端都不成立
    monkeypatch.setitem(bounds._LOG_PREFACTORS, BoundId.THM3_UPPER,
                        lambda x: -0.5 * math.log1p(x * x) - 0.5)


def test_verify_records_interrupted_checks(monkeypatch, quiet_middleware):
    _shrink_new_upper_bound(monkeypatch)
    outcome = cmd_verify(CommandConfig("verify", grid_points=50), quiet_middleware)
    assert outcome.exit_status == 1
    # 其余族照常运行
    assert len(outcome.families) == 9
    assert all(family.checked > 0 for family in outcome.families)
    thm3 = next(family for family in outcome.families if family.name == "thm3")
    assert not thm3.passed
    assert any("经验交叉点无法定位" in invariant for _, invariant in thm3.failures)
    assert any("thm3_upper" in line for line in outcome.failures())


def test_cli_verify_violation_exit_code(runner, monkeypatch):
    _shrink_new_upper_bound(monkeypatch)
    result = runner.invoke(cli, ["verify", "--grid-points", "50", "--no-color"])
    assert result.exit_code == 1, result.output
    assert "[FAIL] thm3" in result.output


def test_cli_verify_exit_code(runner):
    result = runner.invoke(cli, ["verify", "--grid-points", "50", "--no-color"])
    assert result.exit_code == 0, result.output
    assert result.output.count("[PASS]") == 9
