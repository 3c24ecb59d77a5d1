import math
import subprocess
import sys

import pytest

from fblmimo.cli import (
    EXIT_INFEASIBLE, EXIT_IO, EXIT_USAGE, Sweep, UsageError, main, run, spec_from_args,
)
from fblmimo.figures import emit_plot_script
from fblmimo.table import CsvTable, format_value


def run_cli(tmp_path, *args):
    out = tmp_path / "out.csv"
    code = main(list(args) + ["--out", str(out)])
    return code, (CsvTable.read(out) if code == 0 else None)


# -- tables --------------------------------------------------------------------------------

@pytest.mark.parametrize("value,text", [
    (True, "1"), (3, "3"), (0.1, "0.10000000000000001"), (math.nan, "nan"), (-math.inf, "-inf"), ("st", "st"),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_table_round_trip(tmp_path):
    t = CsvTable(["n (uses)", "rate (bits/use)", "scheme"], meta=[("seed", 3), ("snr", 10.0)])
    t.add({"n (uses)": 10, "rate (bits/use)": 1 / 3, "scheme": "ST"})
    t.add({"n (uses)": 20, "rate (bits/use)": math.inf, "scheme": "TD"})
    path = tmp_path / "t.csv"
    t.write(path)
    back = CsvTable.read(path)
    assert back.columns == t.columns
    assert back.rows == t.rows
    assert back.meta_dict() == {"seed": "3", "snr": "10"}
    assert back.to_text() == t.to_text()


def test_table_rejects_partial_row():
    with pytest.raises(KeyError):
        CsvTable(["a", "b"]).add({"a": 1})


# -- sweeps and flags -----------------------------------------------------------------------

def test_sweep_values():
    assert Sweep.parse("n:10:50:5").values() == [10, 20, 30, 40, 50]
    assert Sweep.parse("n:1:4:10").values() == [1, 2, 3, 4]
    assert Sweep.parse("snr:0:20:3:dB").values() == pytest.approx([1.0, 10.0, 100.0], rel=1e-15)
    assert Sweep.parse("epsilon:1e-7:1e-3:5:log").values() == pytest.approx([1e-7, 1e-6, 1e-5, 1e-4, 1e-3])


@pytest.mark.parametrize("text", ["n:10:5:3", "n:1:10:1", "foo:1:2:3", "n:1:2", "n:a:2:3", "n:0:10:3:log",
                                  "n:1:10:3:cubic"])
def test_sweep_errors(text):
    with pytest.raises(UsageError):
        Sweep.parse(text)


def test_db_converted_once():
    spec = spec_from_args(["compare", "--snr-db", "20"])
    assert spec.snr == pytest.approx(100.0, rel=1e-15)
    assert spec.points()[0][0].snr == spec.snr


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\ntx = 8\nrx = 2\nseed = 5\nsnr-db = 20\n")
    spec = spec_from_args(["ergodic", "--config", str(cfg), "--rx", "4"])
    assert (spec.tx, spec.rx, spec.seed, spec.snr_db) == (8, 4, 5, 20.0)


def test_every_input_echoed(tmp_path):
    code, t = run_cli(tmp_path, "compare", "--tx", "3", "--rx", "5", "--snr-db", "7.5", "--per-link-rate", "1.25",
                      "--sweep", "n:10:30:3", "--seed", "11")
    assert code == 0
    meta = t.meta_dict()
    for key, value in [("tx", 3), ("rx", 5), ("snr_db", 7.5), ("per_link_rate", 1.25), ("seed", 11)]:
        assert float(meta[key]) == value
    assert "version" in meta and "sweep" in meta
    assert "workers" not in meta


# -- commands -------------------------------------------------------------------------------

def test_compare_latency_row(tmp_path):
    code, t = run_cli(tmp_path, "compare", "--tx", "4", "--rx", "4", "--snr-db", "10", "--per-link-rate", "2",
                      "--sweep", "n:10:400:40")
    assert code == 0
    rows = {r["n (uses)"]: r for r in t.records()}
    assert rows[200]["eps_td (prob)"] == pytest.approx(rows[50]["eps_st (prob)"], rel=1e-12)


def test_wishart_check_example(tmp_path):
    code, t = run_cli(tmp_path, "wishart-check", "--tx", "4", "--rx", "2", "--trials", "200000", "--seed", "1")
    assert code == 0
    (row,) = list(t.records())
    assert row["closed_form (1)"] == pytest.approx(4 / 3, rel=1e-15)
    assert abs(row["mc_mean (1)"] - row["closed_form (1)"]) <= 3 * row["mc_se (1)"]


def test_wishart_check_divergent(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "wishart-check", "--tx", "4", "--rx", "4", "--trials", "1000")
    assert code == EXIT_INFEASIBLE
    assert "diverges" in capsys.readouterr().err


def test_exchange_match_td(tmp_path):
    code, t = run_cli(tmp_path, "exchange", "--tx", "4", "--rx", "4", "--snr-db", "10", "--per-link-rate", "2",
                      "--match-td", "200")
    assert code == 0
    assert next(t.records())["value"] == 50


def test_bounds_columns(tmp_path):
    code, t = run_cli(tmp_path, "bounds", "--epsilon", "1e-3", "--sweep", "n:100:20000:4:log", "--scheme", "both")
    assert code == 0
    assert sorted(set(t.column("scheme"))) == ["ST", "TD"]
    feasible = [r for r in t.records() if r["converse_feasible (bool)"]]
    assert feasible and len(feasible) < len(t.rows)  # the converse needs (B + delta)/sqrt(n) < 1 - eps
    for r in feasible:
        assert r["normal_approx (bits/use)"] <= r["converse_finite (bits/use)"]


def test_ergodic_command(tmp_path):
    code, t = run_cli(tmp_path, "ergodic", "--tx", "2", "--rx", "2", "--trials", "500", "--sweep", "snr_db:0:20:3")
    assert code == 0
    assert len(t.rows) == 3


def test_figure_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for d in (a, b):
        assert main(["figure", "--id", "8", "--seed", "7", "--out", str(d / "fig8.csv")]) == 0
    assert (a / "fig8.csv").read_bytes() == (b / "fig8.csv").read_bytes()
    assert (a / "fig8.gp").exists()


def test_workers_do_not_change_output():
    argv = ["compare", "--overlay-mc", "--trials", "1500", "--seed", "3", "--sweep", "n:10:100:4"]
    one = run(spec_from_args(argv), workers=1).to_text()
    two = run(spec_from_args(argv), workers=2).to_text()
    assert one == two


# -- plot scripts ---------------------------------------------------------------------------

def test_plot_script_fig7():
    t = run(spec_from_args(["figure", "--id", "7"]))
    script = emit_plot_script(t, "7", "fig7.csv")
    assert "set logscale x" in script and "Blocklength" in script and "Rate per link" in script
    for m in (1, 2, 4, 8, 16):
        assert f'"ST, m={m}"' in script and f'"TD, m={m}"' in script
    assert "Shannon capacity" in script
    assert script.count("linespoints") == 10


def test_plot_script_fig5():
    t = run(spec_from_args(["figure", "--id", "5", "--trials", "200"]))
    script = emit_plot_script(t, "5")
    for c in (1, 2, 4):
        for label in ("ST sim", "TD sim", "ST approx", "TD approx"):
            assert f'"{label}, c={c}"' in script


def test_plot_script_empty_table():
    t = CsvTable(["n (uses)", "eps_st (prob)"])
    script = emit_plot_script(t, "8")
    assert "set xlabel" in script and "plot NaN notitle" in script


def test_plot_script_unknown_id():
    with pytest.raises(ValueError):
        emit_plot_script(CsvTable([]), "3")


# -- exit codes -----------------------------------------------------------------------------

def test_exit_infeasible(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "compare", "--snr-db", "10", "--per-link-rate", "5")
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bogus"], ["compare", "--tx", "x"], ["compare", "--sweep", "n:5:1:3"],
                                  ["figure", "--id", "9"], ["compare", "--epsilon", "2"], []])
def test_exit_usage(argv):
    assert main(argv) == EXIT_USAGE


def test_exit_io(tmp_path, capsys):
    bad = tmp_path / "missing" / "out.csv"
    assert main(["compare", "--out", str(bad)]) == EXIT_IO
    assert str(bad) in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fblmimo", "compare", "--sweep", "n:10:20:2"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("# ")
    assert "eps_st (prob)" in proc.stdout
