import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from covertime import cli


def run(args, capsys=None):
    code = cli.main([str(a) for a in args])
    out = capsys.readouterr().out if capsys else None
    return code, out


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_compare_rows_and_determinism(tmp_path, capsys):
    base = ["compare", "--gen", "complete(8)", "--strategies", "srw,md:B=5", "--trials", "20",
            "--starts", "3", "--tau-min", "0.25", "--tau-max", "1.0", "--tau-step", "0.25",
            "--seed", "5", "--threads", "1"]
    code, out = run(base + ["--out", tmp_path / "a"], capsys)
    assert code == 0
    rows = read_rows(tmp_path / "a" / "curves.csv")
    assert len(rows) == 2 * 4
    assert list(rows[0]) == cli.CURVE_HEADER.split(",")
    assert {r["strategy"] for r in rows} == {"srw", "md:B=5"}
    assert out == (tmp_path / "a" / "curves.csv").read_text()
    run(base + ["--out", tmp_path / "b"], capsys)
    for name in ("curves.csv", "pct_max.csv", "compare.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_compare_md_on_complete_graph_is_deterministic_cover(tmp_path, capsys):
    # every unvisited neighbor is one step away on a complete graph: rho(1) = n - 1
    code, _ = run(["compare", "--gen", "complete(6)", "--strategies", "md", "--trials", "5", "--starts", "2",
                   "--tau-min", "1", "--tau-max", "1", "--out", tmp_path], capsys)
    assert code == 0
    row = read_rows(tmp_path / "curves.csv")[0]
    assert float(row["rho"]) == 5.0 and float(row["stddev"]) == 0.0


def test_svg_is_self_contained_with_series(tmp_path, capsys):
    run(["compare", "--gen", "cycle(10)", "--strategies", "srw,ep", "--trials", "3", "--starts", "2",
         "--out", tmp_path], capsys)
    text = (tmp_path / "compare.svg").read_text()
    assert "<image" not in text and "xlink:href=\"http" not in text
    root = ET.fromstring(text)
    gids = {el.get("id") for el in root.iter()}
    assert {"series-srw", "series-ep"} <= gids
    assert "legend_1" in gids


def test_unreadable_graph_exits_2(tmp_path, capsys):
    assert run(["stats", "--graph", tmp_path / "missing.txt"], capsys)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 x\n")
    assert cli.main(["stats", "--graph", str(bad), "--out", str(tmp_path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_bad_inputs_exit_2(tmp_path, capsys):
    assert run(["stopping", "--weight", "exp", "--theta", "0", "--n", "10", "--out", tmp_path], capsys)[0] == 2
    assert run(["stopping", "--weight", "exp", "--theta", "-2", "--n", "10", "--out", tmp_path], capsys)[0] == 2
    assert run(["stopping", "--weight", "exp", "--n", "10", "--out", tmp_path], capsys)[0] == 2
    assert run(["compare", "--gen", "complete(5)", "--strategies", "zz", "--out", tmp_path], capsys)[0] == 2
    assert run(["compare", "--out", tmp_path], capsys)[0] == 2
    assert run(["oracle", "--gen", "complete(20)", "--out", tmp_path], capsys)[0] == 2
    assert run(["oracle", "--gen", "complete(5)", "--strategies", "md", "--out", tmp_path], capsys)[0] == 2


def test_stats_triangle(tmp_path, capsys):
    g = tmp_path / "tri.txt"
    g.write_text("# triangle\n1 2\n2 3\n3 1\n")
    code, out = run(["stats", "--graph", g, "--out", tmp_path], capsys)
    assert code == 0
    assert out.splitlines() == ["n,m,clustering,diameter,diameter_exact", "3,3,1.000000,1,true"]
    assert read_rows(tmp_path / "degree_histogram.csv") == [{"degree": "2", "count": "3"}]
    assert (tmp_path / "degrees.svg").exists()


@pytest.mark.parametrize("gen,start,expected", [("complete(4)", 0, 5.5), ("path(3)", 1, 5.0)])
def test_oracle_values(tmp_path, capsys, gen, start, expected):
    code, _ = run(["oracle", "--gen", gen, "--strategies", "srw", "--tau", "1.0", "--trials", "4000",
                   "--starts", f"node={start}", "--out", tmp_path], capsys)
    assert code == 0
    row = read_rows(tmp_path / "oracle.csv")[0]
    assert float(row["exact"]) == pytest.approx(expected, abs=1e-9)
    assert row["status"] == "ok"


def test_oracle_mismatch_exits_3(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "oracle_pct", lambda *a, **k: 1000.0)
    code, _ = run(["oracle", "--gen", "complete(4)", "--strategies", "srw", "--tau", "1.0", "--trials", "200",
                   "--starts", "node=0", "--out", tmp_path], capsys)
    assert code == 3
    assert read_rows(tmp_path / "oracle.csv")[0]["status"] == "MISMATCH"


def test_stopping_outputs(tmp_path, capsys):
    code, out = run(["stopping", "--n", "4", "--out", tmp_path], capsys)
    assert code == 0
    rows = read_rows(tmp_path / "stopping.csv")
    assert [int(r["r"]) for r in rows] == [2, 3, 4]
    assert float(rows[0]["expected_reward"]) == pytest.approx(11 / 24, rel=1e-11)
    summary = read_rows(tmp_path / "stopping_summary.csv")[0]
    assert summary["r_star"] == "2"
    code, _ = run(["stopping", "--weight", "exp", "--theta", "5", "--n", "50", "--out", tmp_path], capsys)
    assert code == 0
    summary = read_rows(tmp_path / "stopping_summary.csv")[0]
    assert summary["newton_converged"] == "true"
    assert abs(float(summary["newton_r"]) - int(summary["r_star"])) <= 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\ngen = complete(5)\nstrategies = srw\ntrials = 4\nstarts = 1\n"
                   f"tau-min = 0.5\ntau-max = 1.0\ntau-step = 0.5\nout = {tmp_path / 'cfg'}\n")
    assert run(["compare", "--config", cfg], capsys)[0] == 0
    assert len(read_rows(tmp_path / "cfg" / "curves.csv")) == 2
    assert run(["compare", "--config", cfg, "--strategies", "srw,ep"], capsys)[0] == 0
    assert len(read_rows(tmp_path / "cfg" / "curves.csv")) == 4
    cfg.write_text("gen = complete(5)\nnot_an_option = 1\n")
    assert run(["compare", "--config", cfg, "--out", tmp_path], capsys)[0] == 2


def test_seed_env_fallback(tmp_path, capsys, monkeypatch):
    base = ["compare", "--gen", "cycle(12)", "--strategies", "srw", "--trials", "5", "--starts", "2"]
    run(base + ["--seed", "9", "--out", tmp_path / "a"], capsys)
    monkeypatch.setenv("COVERTIME_SEED", "9")
    run(base + ["--out", tmp_path / "b"], capsys)
    monkeypatch.setenv("COVERTIME_SEED", "10")
    run(base + ["--out", tmp_path / "c"], capsys)
    a, b, c = ((tmp_path / d / "curves.csv").read_text() for d in "abc")
    assert a == b != c
    monkeypatch.setenv("COVERTIME_SEED", "nope")
    assert run(base + ["--out", tmp_path / "d"], capsys)[0] == 2


def test_budget_star_and_baseline(tmp_path, capsys):
    code, _ = run(["budget", "--gen", "star(20)", "--budgets", "1-4", "--walks", "3",
                   "--out", tmp_path / "star"], capsys)
    assert code == 0
    assert [float(r["p"]) for r in read_rows(tmp_path / "star" / "budget.csv")] == [1.0] * 4
    assert 'id="series-' in (tmp_path / "star" / "budget.svg").read_text()

    base = ["budget", "--gen", "ba:n=600,k=2,seed=1", "--budgets", "1,2,5", "--walks", "5"]
    bl = tmp_path / "baseline.json"
    assert run(base + ["--write-baseline", bl, "--out", tmp_path / "b1"], capsys)[0] == 0
    assert run(base + ["--baseline", bl, "--out", tmp_path / "b2"], capsys)[0] == 0
    data = json.loads(bl.read_text())
    data["p"]["1"] -= 0.5
    bl.write_text(json.dumps(data))
    assert run(base + ["--baseline", bl, "--out", tmp_path / "b3"], capsys)[0] == 3


def test_budget_strata_file(tmp_path, capsys):
    code, _ = run(["budget", "--gen", "ba:n=800,k=2,seed=1", "--budgets", "2", "--walks", "5", "--strata",
                   "--out", tmp_path], capsys)
    assert code == 0
    assert (tmp_path / "strata.csv").read_text().startswith("l_size,multiplicity,samples")


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "covertime", "stopping", "--n", "3", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "r,expected_reward"
