import csv
import json

import pytest

from basismerge.cli import main
from basismerge.dataio import write_network, write_timeseries

from conftest import toy_data, toy_network


@pytest.fixture
def case_files(tmp_path):
    assert main(["gen-case", "--weeks", "1", "--out", str(tmp_path / "in")]) == 0
    return ["--network", str(tmp_path / "in" / "network.json"),
            "--timeseries", str(tmp_path / "in" / "timeseries.csv")]


def toy_files(tmp_path, demand=(3.0, 4.0, 8.0, 12.0)):
    net = toy_network()
    write_network(tmp_path / "toy.json", net)
    write_timeseries(tmp_path / "toy.csv", toy_data(demand), net)
    return ["--network", str(tmp_path / "toy.json"), "--timeseries", str(tmp_path / "toy.csv")]


def load(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_gen_case_honours_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("BASISMERGE_OUT", str(tmp_path / "env"))
    assert main(["gen-case", "--weeks", "1"]) == 0
    with open(tmp_path / "env" / "timeseries.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "D_n1", "D_n2", "D_n3", "CF_Re"]
    assert len(rows) == 169


def test_solve_writes_one_row_per_timestep(tmp_path):
    args = toy_files(tmp_path)
    assert main(["solve", *args, "--out", str(tmp_path / "o")]) == 0
    with open(tmp_path / "o" / "solutions.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["objective"]) for r in rows] == [3.0, 4.0, 35.0, 75.0]
    assert [float(r["lmp_n1"]) for r in rows] == [1.0, 1.0, 10.0, 10.0]


def test_bases_single_timestep(tmp_path):
    args = toy_files(tmp_path, demand=(6.0,))
    assert main(["bases", *args, "--out", str(tmp_path / "o")]) == 0
    assert len(load(tmp_path / "o" / "bases.json")["bases"]) == 1
    exact = load(tmp_path / "o" / "exactness.json")
    assert exact["passed"] and exact["schema_version"] == 1


def test_merge_greedy_target_k(tmp_path, case_files):
    out = tmp_path / "o"
    assert main(["merge", "--strategy", "greedy", "--target-k", "4", *case_files, "--out", str(out)]) == 0
    trace = load(out / "strategy_trace.json")
    assert [lvl["k"] for lvl in trace["traces"][0]["levels"]] == [5, 4]
    assert trace["schema_version"] == 1
    assert (out / "optimal_mergers.csv").exists() and (out / "counts.csv").exists()


def test_merge_verify_hosts_appends_residuals(tmp_path, case_files):
    out = tmp_path / "o"
    assert main(["merge", "--strategy", "greedy-adjacent", "--adjacency", "active-set",
                 "--verify-hosts", *case_files, "--out", str(out)]) == 0
    mergers = load(out / "mergers.json")
    assert all(p["relative_residual"] <= 1e-8 for p in mergers["partitions"])
    assert len(mergers["pairwise"]) == 10
    assert load(out / "adjacency.json")["mode"] == "active_set"


def test_merge_adjacency_file(tmp_path, case_files):
    adj = tmp_path / "adj.json"
    adj.write_text(json.dumps({"pairs": [[1, 2], [2, 3], [3, 4], [4, 5]]}))
    out = tmp_path / "o"
    assert main(["merge", "--strategy", "greedy-adjacent", "--adjacency", "file",
                 "--adjacency-file", str(adj), *case_files, "--out", str(out)]) == 0
    counts = list(csv.reader(open(out / "counts.csv", encoding="utf-8")))
    assert counts[1] == ["greedy_adjacent", "1", "4", "3", "2", "1"]


def test_report_is_byte_identical_across_runs(tmp_path, case_files):
    for name in ("a", "b"):
        assert main(["report", *case_files, "--out", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert {"bases.json", "bases_table.csv", "points.csv", "exactness.json", "strategy_trace.json",
            "mergers.json", "counts.csv", "optimal_mergers.csv", "adjacency.json"} <= set(files)
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_exit_codes(tmp_path, case_files, capsys):
    out = ["--out", str(tmp_path / "o")]
    assert main(["bases", "--network", str(tmp_path / "nope.json"),
                 "--timeseries", str(tmp_path / "nope.csv"), *out]) == 3
    assert "[input]" in capsys.readouterr().err
    assert main(["merge", "--strategy", "exhaustive", "--exhaustive-cap", "3", *case_files, *out]) == 5
    assert "cap of 3" in capsys.readouterr().err
    assert main(["merge", "--strategy", "greedy", "--target-k", "99", *case_files, *out]) == 2
    assert main(["merge", "--strategy", "greedy-adjacent", "--adjacency", "file", *case_files, *out]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["merge", "--strategy", "bogus", *case_files])
    assert exc.value.code == 2


def test_infeasible_timestep_reports_t(tmp_path, capsys):
    args = toy_files(tmp_path, demand=(3.0, 200.0))
    assert main(["bases", *args, "--out", str(tmp_path / "o")]) == 4
    assert "t=2" in capsys.readouterr().err
