import csv
import json
import subprocess
import sys

import pytest

from dstream.cli import (
    EXIT_NOT_CONVERGED,
    EXIT_USAGE,
    ComparisonTable,
    CaseResult,
    format_residual,
    main,
    parse_ladder,
    scheme_from_key,
)
from dstream.grid import read_field_csv


def _report(path):
    return json.loads((path / "report.json").read_text())


def test_run_writes_all_artifacts(tmp_path):
    out = tmp_path / "r5"
    code = main(["run", "--problem", "step", "--scheme", "dstream", "--range", "5",
                 "--nx", "30", "--ny", "30", "--out", str(out)])
    assert code == 0
    rep = _report(out)
    assert rep["iterations"] == 2
    assert rep["final_residual"] == 0
    assert rep["max_error"] <= 1e-12
    assert rep["profile_row"] == 23
    assert read_field_csv(out / "field.csv").grid.shape == (30, 30)
    assert (out / "residuals.csv").read_text().startswith("iter,residual\n")
    assert (out / "profile.csv").read_text().startswith("x,phi,exact\n")


def test_report_replays_bit_identically(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--problem", "smith-hutton", "--scheme", "quick", "--max-iter", "300",
                 "--out", str(a)]) == 0
    assert main(["run", "--config", str(a / "report.json"), "--out", str(b)]) == 0
    assert (a / "field.csv").read_bytes() == (b / "field.csv").read_bytes()
    assert _report(b)["config"] == _report(a)["config"]


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "sine", "scheme": "upwind", "relax": 0.5}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--relax", "1.0", "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["problem"] == "sine" and rep["alpha"] == 1.0 and rep["scheme"] == "Upwind"


def test_tvd_defaults_to_tuned_relaxation(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--problem", "double-step", "--scheme", "tvd", "--limiter", "superbee",
                 "--max-iter", "3", "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["alpha"] == 0.9
    assert rep["config"]["sweep"] == "fixed"
    assert rep["converged"] is False


def test_strict_non_convergence(tmp_path):
    code = main(["run", "--problem", "step", "--scheme", "minmod", "--max-iter", "3", "--strict",
                 "--out", str(tmp_path)])
    assert code == EXIT_NOT_CONVERGED


@pytest.mark.parametrize("argv", [
    ["run", "--scheme", "foo"],
    ["run", "--problem", "cavity"],
    ["run", "--range", "7"],
    ["run", "--relax", "1.5"],
    ["compare", "--scheme", "dstream-r9"],
    ["converge", "--ladder", "20by10"],
])
def test_usage_errors(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        code = main(argv + ["--out", str(tmp_path)])
        raise SystemExit(code)
    assert exc.value.code == EXIT_USAGE


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE


def test_scheme_keys():
    assert scheme_from_key("dstream-r4-limited").label == "DStreaM R4 limited"
    assert scheme_from_key("quick").kind == "tvd"
    assert parse_ladder("20x10,40X20") == ((20, 10), (40, 20))


def test_residual_formatting():
    assert format_residual(0.0) == "0"
    assert format_residual(8.123e-9) == "8.1e-09"


def test_compare_step_table(tmp_path):
    assert main(["compare", "--problem", "step", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "comparison.csv").open()))
    assert len(rows) == 9
    for r in rows[:6]:
        assert r["iterations"] == "2" and r["residual"] == "0"
    md = (tmp_path / "comparison.md").read_text()
    assert "| DStreaM R5 | 1 | 2 | 0 |" in md
    assert "Upwind/DStreaM need fewer iterations than:" in md


def test_markdown_and_csv_carry_the_same_numbers(tmp_path):
    assert main(["compare", "--problem", "sine", "--scheme", "upwind", "--scheme", "minmod",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "comparison.csv").open()))
    md_rows = [line.strip("|").split("|") for line in (tmp_path / "comparison.md").read_text().splitlines()[2:4]]
    for r, m in zip(rows, md_rows):
        m = [c.strip() for c in m]
        assert m[0] == r["scheme"]
        assert float(m[1]) == pytest.approx(float(r["alpha"]))
        assert m[2] == r["iterations"]
        assert m[3] == format_residual(float(r["residual"]))
        assert float(m[4]) == pytest.approx(float(r["max_error"]), rel=5e-3)


def test_single_scheme_table():
    t = ComparisonTable("step", (30, 30), [CaseResult("Upwind", "upwind", 1.0, 2, 0.0, 0.5, 0.0, 0.0, True)])
    lines = t.to_markdown().splitlines()
    assert len(lines) == 3
    assert t.ratio_line() == ""


def test_diverged_row_is_reported():
    row = CaseResult("Min-Mod", "minmod", 1.0, 7, float("nan"), float("nan"), float("nan"), float("nan"),
                     False, diverged=True)
    t = ComparisonTable("step", (30, 30), [row])
    assert "diverged" in t.to_markdown()
    assert t.csv_rows()[0][-1] == "diverged"


def test_converge_single_size(tmp_path):
    assert main(["converge", "--problem", "smith-hutton", "--scheme", "upwind", "--scheme", "dstream-r1",
                 "--ladder", "20x10", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "convergence.csv").open()))
    assert [r["scheme"] for r in rows] == ["Upwind", "DStreaM R1"]
    assert all(r["iterations"] == "4" for r in rows)
    assert rows[0]["nodes"] == str(21 * 11)


def test_module_entry_point(tmp_path):
    done = subprocess.run([sys.executable, "-m", "dstream", "run", "--problem", "step", "--scheme",
                           "upwind", "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 0
    assert "converged after 2 iterations" in done.stdout
