import json

import pytest

from mlsparse.cli import main
from mlsparse.graph import load_graph
from mlsparse.multilevel import load_solution, load_terminals

from conftest import GOLDEN


@pytest.fixture
def files(tmp_path, capsys):
    g = tmp_path / "g.txt"
    t = tmp_path / "t.txt"
    assert main(["gen", "--n", "8", "--seed", "1", "--out", str(g), "--ell", "2", "--terminals-out", str(t)]) == 0
    capsys.readouterr()
    return tmp_path, g, t


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_ratio_prints_exact_value(capsys):
    code, out, _ = run(capsys, "ratio", "--ell", "2", "--g", "linear")
    assert code == 0 and out == "4/3\n"


def test_ratio_table_golden(capsys, tmp_path):
    code, out, _ = run(capsys, "ratio", "--ell", "5", "--table", "--out", tmp_path / "r.csv")
    expected = (
        "ell,t,t_float,exact\n"
        "1,1,1.000000,1\n"
        "2,4/3,1.333333,1\n"
        "3,3/2,1.500000,1\n"
        "4,44/27,1.629630,1\n"
        "5,245/143,1.713287,1\n"
    )
    assert code == 0 and out == expected
    assert (tmp_path / "r.csv").read_text() == expected


def test_ratio_json(capsys):
    code, out, _ = run(capsys, "ratio", "--ell", "2", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == 1 and doc["t"] == "4/3" and doc["worst_case"] == ["2/3", "1/3"]


def test_gen_and_seed_env(capsys, tmp_path, monkeypatch):
    code, out, _ = run(capsys, "gen", "--n", "7", "--seed", "3")
    assert code == 0 and load_graph(out).n == 7
    monkeypatch.setenv("MLSPARSE_SEED", "3")
    assert run(capsys, "gen", "--n", "7")[1] == out
    monkeypatch.setenv("MLSPARSE_SEED", "x")
    assert run(capsys, "gen", "--n", "7")[0] == 2


def test_gen_writes_terminals(files):
    tmp, g, t = files
    h = load_terminals(t.read_text())
    assert h.sizes() == (5, 2)
    h.check_graph(load_graph(g.read_text()))


def test_closure_spanner_steiner(capsys, files):
    _, g, _ = files
    code, out, _ = run(capsys, "closure", "--graph", g, "--terminals", "0,3,5")
    assert code == 0 and len(out.strip().splitlines()) == 3
    code, out, _ = run(capsys, "spanner", "--graph", g, "--terminals", "0,3,5", "--f", "x2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "spanner" and doc["weight"] == 9
    code, out, _ = run(capsys, "steiner", "--graph", g, "--terminals", "0,3,5", "--exact")
    assert code == 0 and "weight" in out


def test_exact(capsys, files):
    _, g, _ = files
    code, out, _ = run(capsys, "exact", "--graph", g, "--pairs", "0,3;3,5", "--f", "x1.2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["pairs"] == [[0, 3], [3, 5]]
    code_m, out_m, _ = run(capsys, "exact", "--graph", g, "--pairs", "0,3;3,5", "--f", "x1.2", "--backend", "milp", "--json")
    assert json.loads(out_m)["weight"] == doc["weight"]


def test_multilevel_with_optimum(capsys, files):
    tmp, g, t = files
    sol = tmp / "sol.txt"
    code, out, _ = run(
        capsys, "multilevel", "--graph", g, "--terminals-file", t, "--f", "x2", "--optimum", "--out", sol, "--json"
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["ratio"] >= 1 and doc["cost"] >= doc["optimum"]
    graph = load_graph(g.read_text())
    assert load_solution(sol.read_text(), graph).ell == 2


@pytest.mark.parametrize("preset", ["bu", "td", "powers2", "composite", "metric-closure"])
def test_multilevel_presets(capsys, files, preset):
    _, g, t = files
    code, out, _ = run(capsys, "multilevel", "--graph", g, "--terminals-file", t, "--q-preset", preset, "--json")
    assert code == 0 and json.loads(out)["cost"] > 0


def test_multilevel_custom_and_steiner(capsys, files):
    _, g, t = files
    code, _, err = run(capsys, "multilevel", "--graph", g, "--terminals-file", t, "--q-preset", "custom")
    assert code == 2 and "custom" in err
    code, _, _ = run(capsys, "multilevel", "--graph", g, "--terminals-file", t, "--q-preset", "custom", "--q", "1,2")
    assert code == 0
    code, out, _ = run(capsys, "multilevel", "--graph", g, "--terminals-file", t, "--kind", "steiner", "--json")
    assert code == 0 and json.loads(out)["kind"] == "steiner"


def test_experiment_and_plot_golden(capsys, tmp_path):
    csv = tmp_path / "small.csv"
    code, _, _ = run(
        capsys, "experiment", "--n", "6,8", "--ell", "2,3", "--t", "1.2,2", "--trials", "2",
        "--subroutine", "oracle,metric-closure", "--out", csv,
    )
    assert code == 0
    assert csv.read_text() == (GOLDEN / "small.csv").read_text()
    svg = tmp_path / "box.svg"
    assert run(capsys, "plot", "--csv", csv, "--kind", "box", "--by", "t", "--out", svg)[0] == 0
    assert svg.read_text() == (GOLDEN / "box_t.svg").read_text()


def test_export_ilp_golden(capsys, tmp_path):
    g = tmp_path / "tri.txt"
    g.write_text("1 2 1\n2 3 1\n1 3 3\n")
    lp = tmp_path / "tri.lp"
    code, out, _ = run(capsys, "export-ilp", "--graph", g, "--pairs", "1,3", "--f", "id", "--out", lp)
    assert code == 0 and "9 binaries" in out
    assert lp.read_text() == (GOLDEN / "tri.lp").read_text()


@pytest.mark.parametrize(
    "argv",
    [
        ["exact", "--graph", "missing.txt"],
        ["exact", "--graph", "{g}", "--f", "x0.5"],
        ["exact", "--graph", "{g}", "--pairs", "1,1"],
        ["exact", "--graph", "{g}", "--pairs", "0,99"],
        ["spanner", "--graph", "{g}", "--terminals", "0,a"],
        ["ratio", "--ell", "0"],
        ["ratio", "--ell", "3", "--g", "table:3,1"],
        ["experiment", "--n", "6", "--trials", "0"],
        ["plot", "--csv", "{g}", "--out", "{tmp}/x.svg"],
        ["gen", "--n", "2"],
    ],
)
def test_usage_errors_exit_2(capsys, files, argv):
    tmp, g, _ = files
    argv = [a.format(g=g, tmp=tmp) for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_bad_graph_file_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 1\n1 2 5\n")
    code, _, err = run(capsys, "steiner", "--graph", bad, "--terminals", "1,2")
    assert code == 2 and "line 2" in err


def test_compute_error_exit_1(capsys, tmp_path):
    g = tmp_path / "big.txt"
    # 12 terminals with an additive distortion exceed the closure oracle guard
    g.write_text("".join(f"{i} {i + 1} 1\n" for i in range(12)))
    code, _, err = run(capsys, "spanner", "--graph", g, "--terminals", ",".join(map(str, range(12))), "--f", "+1")
    assert code == 1 and "GuardExceededError" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ratio"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2
