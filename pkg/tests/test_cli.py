import json
import subprocess
import sys

import pytest

from spectral_gap_lab import cli, structure
from spectral_gap_lab.graph import WeightedGraph, parse_graph, read_graph, write_graph
from spectral_gap_lab.report import CheckResult

K4 = "1 2 1\n1 3 1\n1 4 1\n2 3 1\n2 4 1\n3 4 1\n"


@pytest.fixture
def gfile(tmp_path):
    def make(text, name="g.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


@pytest.mark.parametrize("chain, gap", [("rw", 4.0), ("cycle", 6.0), ("matching", 6.0), ("ip", 4.0),
                                         ("ep:2", 4.0), ("cep:2,1,1", 4.0)])
def test_gap_k4(capsys, gfile, chain, gap):
    code, doc = run_json(capsys, ["gap", "--graph", gfile(K4), "--chain", chain])
    assert code == 0
    assert doc["result"]["gap"] == pytest.approx(gap, abs=1e-10)


def test_gap_single_edge_ip(capsys, gfile):
    code, doc = run_json(capsys, ["gap", "--graph", gfile("1 2 0.35\n"), "--chain", "ip"])
    assert code == 0 and doc["result"]["gap"] == pytest.approx(0.7, rel=1e-14)


def test_json_document_shape(capsys, gfile):
    code, doc = run_json(capsys, ["gap", "--graph", gfile(K4), "--chain", "cp", "--spectrum"])
    assert code == 0
    assert set(doc) == {"tool_version", "command", "config", "checks", "summary", "wall_time_ms", "result"}
    assert set(doc["config"]["tolerances"]) == {"eigen_rel", "cluster_rel", "psd_rel", "match_rel"}
    assert doc["summary"] == {"passed": 1, "failed": 0, "skipped": 0}
    check = doc["checks"][0]
    assert {"name", "status", "metric", "tolerance", "details"} <= set(check)
    clusters = [(round(c["value"], 9), c["multiplicity"]) for c in doc["result"]["spectrum"]["clusters"]]
    assert clusters == [(0, 1), (6, 2)]


def test_no_timing_is_reproducible(capsys, gfile):
    path = gfile(K4)
    argv = ["verify", "aldous", "--graph", path, "--no-timing"]
    cli.main(argv)
    first = capsys.readouterr().out
    cli.main(argv)
    assert capsys.readouterr().out == first
    assert json.loads(first)["wall_time_ms"] == 0


def test_reduce_triangle(capsys, gfile, tmp_path):
    out = tmp_path / "red.txt"
    code, doc = run_json(capsys, ["reduce", "--graph", gfile("1 2 1\n1 3 1\n2 3 1\n"),
                                  "--vertex", "3", "--out", str(out)])
    assert code == 0
    red = read_graph(out)
    assert red.n == 2 and red.weights[0, 1] == pytest.approx(1.5, rel=1e-15)
    assert parse_graph(doc["result"]["edges"]) == red
    assert doc["result"]["reduced_gap"] >= doc["result"]["gap"]


def test_reduce_path_series_rule(capsys, gfile):
    a, b = 2.0, 3.0
    code, doc = run_json(capsys, ["reduce", "--graph", gfile(f"1 2 {a}\n2 3 {b}\n"), "--vertex", "2"])
    assert code == 0
    assert parse_graph(doc["result"]["edges"]).weights[0, 1] == pytest.approx(a * b / (a + b), rel=1e-15)


def test_text_format(capsys, gfile):
    code = cli.main(["gap", "--graph", gfile(K4), "--chain", "rw", "--format", "text"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("sgl ") and "gap:" in out and "PASS" in out.upper()


PATH4 = "1 2 1\n2 3 1\n3 4 1\n"


@pytest.mark.parametrize("argv, fragment", [
    (["gap", "--graph", "{g}", "--chain", "ep:9"], "particle"),
    (["gap", "--graph", "{g}", "--chain", "zz"], "chain"),
    (["gap", "--graph", "{odd}", "--chain", "matching"], None),
    (["reduce", "--graph", "{g}", "--vertex", "5"], "not in 1..4"),
    (["reduce", "--graph", "{g}", "--vertex", "0"], "not in 1..4"),
    (["verify", "aldous", "--graph", "{g}", "--trials", "0"], "trials"),
])
def test_input_errors_exit_2(capsys, gfile, argv, fragment):
    paths = {"g": gfile(PATH4), "odd": gfile("1 2 1\n2 3 1\n", "odd.txt")}
    code = cli.main([a.format(**paths) for a in argv])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("sgl: error:")
    if fragment:
        assert fragment in err


def test_bad_graph_files(capsys, gfile, tmp_path):
    assert cli.main(["gap", "--graph", gfile("1 2 -1\n"), "--chain", "rw"]) == 2
    assert cli.main(["gap", "--graph", gfile("1 2 1\n3 4 1\n", "dis.txt"), "--chain", "rw"]) == 2
    assert cli.main(["gap", "--graph", str(tmp_path / "missing.txt"), "--chain", "rw"]) == 2
    assert cli.main(["verify", "aldous"]) == 2
    capsys.readouterr()


def test_size_limit_and_override(capsys, gfile, monkeypatch):
    path = gfile("".join(f"{i} {i + 1} 1\n" for i in range(1, 7)))
    monkeypatch.delenv("SGL_MAX_N", raising=False)
    assert cli.main(["gap", "--graph", path, "--chain", "ip"]) == 2
    assert "SGL_MAX_N" in capsys.readouterr().err
    monkeypatch.setenv("SGL_MAX_N", "7")
    assert cli.main(["gap", "--graph", path, "--chain", "ep:3"]) == 0
    capsys.readouterr()


def test_failing_check_exits_1(capsys, gfile, monkeypatch):
    def broken(g, tol=None, max_n=None):
        return [CheckResult("aldous.equality", "fail", 1.0, 0.0, "forced", "")]
    monkeypatch.setattr(structure, "verify_aldous", broken)
    code, doc = run_json(capsys, ["verify", "aldous", "--graph", gfile(K4)])
    assert code == 1 and doc["summary"]["failed"] == 1


@pytest.mark.parametrize("n, count", [(4, 3), (5, 12)])
def test_verify_matrices(capsys, n, count):
    code, doc = run_json(capsys, ["verify", "matrices", "--n", str(n)])
    assert code == 0
    assert doc["summary"]["passed"] == count == len(doc["checks"])


def test_verify_matrices_rejects_other_n(capsys):
    assert cli.main(["verify", "matrices", "--n", "6"]) == 2
    capsys.readouterr()


def test_verify_aldous_random_sweep(capsys):
    code, doc = run_json(capsys, ["verify", "aldous", "--random", "4", "--trials", "50", "--seed", "3"])
    assert code == 0 and doc["summary"]["failed"] == 0
    eq = [c for c in doc["checks"] if c["name"].endswith("aldous.equality")]
    assert len(eq) == 50
    assert eq[0]["name"].startswith("trial[0].")


@pytest.mark.slow
def test_verify_aldous_random_sweep_n5(capsys):
    code, doc = run_json(capsys, ["verify", "aldous", "--random", "5", "--trials", "50"])
    assert code == 0 and doc["summary"]["failed"] == 0


def test_seeds_are_reproducible(capsys):
    argv = ["verify", "structure", "--random", "4", "--trials", "3", "--seed", "9", "--no-timing"]
    cli.main(argv)
    a = capsys.readouterr().out
    cli.main(argv)
    assert capsys.readouterr().out == a


def test_verify_octopus_graph_and_random(capsys, gfile):
    code, doc = run_json(capsys, ["verify", "octopus", "--graph", gfile(K4)])
    assert code == 0 and doc["summary"]["failed"] == 0
    code, doc = run_json(capsys, ["verify", "octopus", "--n", "5", "--trials", "5"])
    assert code == 0
    names = {c["name"].split(".", 1)[1] for c in doc["checks"]}
    assert {"C.psd", "Cprime.decomposition", "coefficients.bound"} <= names


def test_verify_structure_graph(capsys, gfile):
    code, doc = run_json(capsys, ["verify", "structure", "--graph", gfile(K4)])
    assert code == 0
    names = {c["name"] for c in doc["checks"]}
    assert {"subset_sums.included", "alternating.eigenvalue", "pairing.conjugate", "dims.hooks"} <= names


def test_parse_chain():
    assert cli.parse_chain("EP:2") == ("EP", (2,))
    assert cli.parse_chain("cep:2,1,1") == ("CEP", (2, 1, 1))
    assert cli.parse_chain("cp") == cli.parse_chain("cycle")
    with pytest.raises(ValueError):
        cli.parse_chain("ep:x")


def test_console_entry_point(tmp_path):
    g = tmp_path / "k4.txt"
    write_graph(WeightedGraph.complete(4), g)
    proc = subprocess.run([sys.executable, "-m", "spectral_gap_lab.cli", "gap", "--graph", str(g),
                           "--chain", "cycle"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["gap"] == pytest.approx(6.0, abs=1e-10)
