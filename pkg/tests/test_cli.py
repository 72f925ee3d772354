"""End-to-end command-line behavior: files, manifests, determinism, exit codes."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from solverhelpers import explicit_instance
from labellens.cli import MANIFEST_NAME, MANIFEST_SCHEMA, main
from labellens.instance import load_instance, save_instance


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture()
def cycle_doc(tmp_path):
    """Multi-iteration instance document (profitable 3-cycle)."""
    inst = explicit_instance(
        5,
        {(0, 1): 2.0, (1, 2): -5.0, (2, 3): -5.0, (3, 1): -5.0, (1, 4): 2.0, (3, 4): 2.0},
        [0.0, 1.0, 1.0, 1.0, 0.0],
        6.0,
        name="loopy",
    )
    path = tmp_path / "loopy.txt"
    save_instance(inst, path)
    return path


def read_bytes_tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


# ---------------------------------------------------------------------------
# gen


def test_gen_writes_deterministic_documents(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("gen", "--seed", 5, "--count", 3, "--class", "tight", "--out", a) == 0
    printed = capsys.readouterr().out.strip().splitlines()
    assert len(printed) == 3
    assert run_cli("gen", "--seed", 5, "--count", 3, "--class", "tight", "--out", b) == 0
    assert read_bytes_tree(a) == read_bytes_tree(b)
    for line in printed:
        inst = load_instance(line)
        assert inst.name.startswith("T-")


def test_gen_honors_env_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LABELLENS_OUT", str(tmp_path / "envout"))
    assert run_cli("gen", "--seed", 1) == 0
    out_line = capsys.readouterr().out.strip()
    assert out_line.startswith(str(tmp_path / "envout"))
    assert Path(out_line).is_file()


@pytest.mark.parametrize("klass,prefix", [("uniform", "U"), ("cluster", "C"), ("tight", "T")])
def test_gen_classes_name_prefixes(tmp_path, capsys, klass, prefix):
    assert run_cli("gen", "--seed", 2, "--class", klass, "--out", tmp_path) == 0
    path = capsys.readouterr().out.strip()
    assert Path(path).name.startswith(f"{prefix}-")
    load_instance(path)  # parses cleanly


# ---------------------------------------------------------------------------
# solve


def test_solve_prints_cost_and_one_based_path(cycle_doc, capsys):
    assert run_cli("solve", "--instance", cycle_doc) == 0
    out = capsys.readouterr().out
    assert "loopy: optimal cost -6 path [1 2 3 4 5]" in out
    assert "iterations" in out


def test_solve_infeasible_exits_two(tmp_path, capsys):
    inst = explicit_instance(3, {(0, 1): 1.0, (1, 2): 1.0}, [0.0, 1.0, 9.0], 5.0, name="stuck")
    path = tmp_path / "stuck.txt"
    save_instance(inst, path)
    assert run_cli("solve", "--instance", path) == 2
    assert "infeasible" in capsys.readouterr().out


def test_solve_missing_file_exits_one(tmp_path, capsys):
    assert run_cli("solve", "--instance", tmp_path / "missing.txt") == 1
    assert "error:" in capsys.readouterr().err


def test_solve_without_instances_exits_one(capsys):
    assert run_cli("solve") == 1
    assert "no instance" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# collect


def collect_run(cycle_doc, out_dir, *extra) -> Path:
    assert run_cli("collect", "--instance", cycle_doc, "--out", out_dir, *extra) == 0
    return Path(out_dir) / "loopy"


def test_collect_writes_manifest_and_datasets(cycle_doc, tmp_path, capsys):
    run_dir = collect_run(cycle_doc, tmp_path / "out")
    out = capsys.readouterr().out
    assert "loopy: optimal" in out
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["schema"] == MANIFEST_SCHEMA
    assert manifest["instance"] == "loopy"
    assert manifest["n"] == 5 and manifest["capacity"] == 6.0
    assert manifest["status"] == "optimal" and manifest["cost"] == -6.0
    assert manifest["path"] == [0, 1, 2, 3, 4]
    assert manifest["iterations"] >= 2
    assert manifest["datasets"] == ["G", "I"]
    for variant in ("G", "I"):
        for iteration, name in manifest["files"][variant].items():
            file_path = run_dir / name
            assert file_path.is_file()
            with open(file_path, newline="", encoding="utf-8") as handle:
                data_rows = list(csv.DictReader(handle))
            assert len(data_rows) == manifest["rows"][variant][iteration]
            assert all(r["executionID"] == manifest["execution_id"] for r in data_rows)
    # I is a subset of G, iteration by iteration
    for iteration in manifest["files"]["G"]:
        assert manifest["rows"]["I"][iteration] <= manifest["rows"]["G"][iteration]


def test_collect_repeat_runs_byte_identical(cycle_doc, tmp_path):
    first = collect_run(cycle_doc, tmp_path / "one")
    second = collect_run(cycle_doc, tmp_path / "two")
    serial = collect_run(cycle_doc, tmp_path / "three", "--single-thread")
    assert read_bytes_tree(first) == read_bytes_tree(second) == read_bytes_tree(serial)


def test_collect_policy_changes_execution_id(cycle_doc, tmp_path):
    node_dir = collect_run(cycle_doc, tmp_path / "n")
    greedy_dir = collect_run(cycle_doc, tmp_path / "g", "--policy", "greedy")
    a = json.loads((node_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    b = json.loads((greedy_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert a["execution_id"] != b["execution_id"]
    assert a["cost"] == b["cost"]  # same optimum either way


def test_collect_bitsets_off(cycle_doc, tmp_path):
    run_dir = collect_run(cycle_doc, tmp_path / "slim", "--bitsets", "off")
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["bitsets"] is False
    name = manifest["files"]["G"]["1"]
    with open(run_dir / name, newline="", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
    assert "visited" not in header and "unreachable" not in header


# ---------------------------------------------------------------------------
# normalize


def test_normalize_adds_files_and_updates_manifest(cycle_doc, tmp_path, capsys):
    run_dir = collect_run(cycle_doc, tmp_path / "out")
    capsys.readouterr()
    assert run_cli("normalize", "--run", run_dir) == 0
    assert "normalized iterations" in capsys.readouterr().out
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert manifest["objective_stats"] == "pooled"
    iterations = manifest["iterations"]
    for variant in ("G", "I"):
        produced = manifest["normalized_files"][variant]
        assert sorted(produced) == [str(i) for i in range(2, iterations + 1)]
        for name in produced.values():
            with open(run_dir / name, newline="", encoding="utf-8") as handle:
                header = handle.readline().strip().split(",")
            assert header[0] == "executionID" and header[-1] == "_flag"
            assert "efficiency" in header
    # the I variant is the filtered G universe: row counts match raw I files
    for iteration, name in manifest["normalized_files"]["I"].items():
        with open(run_dir / name, newline="", encoding="utf-8") as handle:
            count = sum(1 for _ in csv.DictReader(handle))
        assert count == manifest["rows"]["I"][iteration]


def test_normalize_single_iteration_run_is_skipped(tmp_path, capsys):
    inst = explicit_instance(3, {(0, 1): -1.0, (1, 2): -1.0}, [0.0, 1.0, 0.0], 5.0, name="plain")
    doc = tmp_path / "plain.txt"
    save_instance(inst, doc)
    assert run_cli("collect", "--instance", doc, "--out", tmp_path / "out") == 0
    capsys.readouterr()
    run_dir = tmp_path / "out" / "plain"
    assert run_cli("normalize", "--run", run_dir) == 0
    assert "nothing to normalize" in capsys.readouterr().out
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert "normalized_files" not in manifest


def test_normalize_missing_run_exits_one(tmp_path, capsys):
    assert run_cli("normalize", "--run", tmp_path / "nowhere") == 1
    assert "error:" in capsys.readouterr().err


def test_normalize_bitsets_off_round_trips(cycle_doc, tmp_path):
    run_dir = collect_run(cycle_doc, tmp_path / "slim", "--bitsets", "off")
    assert run_cli("normalize", "--run", run_dir) == 0
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    name = manifest["normalized_files"]["G"]["2"]
    with open(run_dir / name, newline="", encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
    assert "visited" not in header


# ---------------------------------------------------------------------------
# summarize and bench


def test_summarize_table_and_csv(cycle_doc, tmp_path, capsys):
    run_dir = collect_run(cycle_doc, tmp_path / "out")
    capsys.readouterr()
    table_csv = tmp_path / "table.csv"
    assert run_cli("summarize", "--run", run_dir, "--out", table_csv) == 0
    out = capsys.readouterr().out
    assert "dataset" in out and "loopy" in out
    with open(table_csv, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    # one named group plus the "all" row, for each of G and I
    assert [(r["dataset"], r["group"]) for r in rows] == [
        ("G", "all"),
        ("G", "loopy"),
        ("I", "all"),
        ("I", "loopy"),
    ] or [(r["dataset"], r["group"]) for r in rows] == [
        ("G", "loopy"),
        ("G", "all"),
        ("I", "loopy"),
        ("I", "all"),
    ]
    g_all = next(r for r in rows if r["dataset"] == "G" and r["group"] == "all")
    assert int(g_all["instances"]) == 1
    assert float(g_all["pareto_pct"]) > 0


def test_summarize_discovers_runs_recursively(cycle_doc, tmp_path, capsys):
    collect_run(cycle_doc, tmp_path / "data" / "nested")
    capsys.readouterr()
    assert run_cli("summarize", "--data", tmp_path / "data") == 0
    assert "loopy" in capsys.readouterr().out


def test_summarize_without_runs_exits_one(capsys):
    assert run_cli("summarize") == 1
    assert "no runs" in capsys.readouterr().err


def test_bench_policies_reports_match(cycle_doc, tmp_path, capsys):
    table_csv = tmp_path / "bench.csv"
    assert run_cli("bench-policies", "--instance", cycle_doc, "--out", table_csv) == 0
    out = capsys.readouterr().out
    assert "costs match across policies: yes" in out
    assert "including infeasible" in out
    with open(table_csv, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [r["policy"] for r in rows] == ["node", "greedy"]
    assert all(int(r["insertions"]) <= int(r["attempts"]) for r in rows)


# ---------------------------------------------------------------------------
# convert


CVRP_DOC = """NAME : toy5
TYPE : CVRP
DIMENSION : 5
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 40
NODE_COORD_SECTION
1 0 0
2 10 0
3 10 10
4 0 10
5 5 5
DEMAND_SECTION
1 0
2 7
3 9
4 4
5 6
DEPOT_SECTION
1
-1
EOF
"""


def test_convert_builds_solvable_instance(tmp_path, capsys):
    cvrp = tmp_path / "toy5.vrp"
    cvrp.write_text(CVRP_DOC, encoding="utf-8")
    out_doc = tmp_path / "toy5.txt"
    assert run_cli("convert", "--cvrp", cvrp, "--out", out_doc) == 0
    assert "toy5" in capsys.readouterr().out
    inst = load_instance(out_doc)
    assert inst.n == 6  # depot duplicated as the destination
    assert inst.source == 0 and inst.dest == 5
    assert inst.demand[inst.source] == 0 and inst.demand[inst.dest] == 0
    assert run_cli("solve", "--instance", out_doc) == 0


def test_convert_prize_seed_changes_output(tmp_path):
    cvrp = tmp_path / "toy5.vrp"
    cvrp.write_text(CVRP_DOC, encoding="utf-8")
    a, b, c = tmp_path / "a.txt", tmp_path / "b.txt", tmp_path / "c.txt"
    assert run_cli("convert", "--cvrp", cvrp, "--out", a, "--seed", 1) == 0
    assert run_cli("convert", "--cvrp", cvrp, "--out", b, "--seed", 1) == 0
    assert run_cli("convert", "--cvrp", cvrp, "--out", c, "--seed", 2) == 0
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


# ---------------------------------------------------------------------------
# config layering


def test_config_file_supplies_defaults_and_flags_win(cycle_doc, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({"instances": [str(cycle_doc)], "policy": "greedy", "split": 0.5}),
        encoding="utf-8",
    )
    # config alone: greedy
    assert run_cli("collect", "--config", config, "--out", tmp_path / "a") == 0
    a = json.loads((tmp_path / "a" / "loopy" / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert a["policy"] == "greedy"
    # explicit flag beats the config file
    assert run_cli("collect", "--config", config, "--policy", "node", "--out", tmp_path / "b") == 0
    b = json.loads((tmp_path / "b" / "loopy" / MANIFEST_NAME).read_text(encoding="utf-8"))
    assert b["policy"] == "node"


def test_config_bad_bitsets_value_exits_one(cycle_doc, tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"bitsets": "sometimes"}), encoding="utf-8")
    assert run_cli("collect", "--instance", cycle_doc, "--config", config, "--out", tmp_path / "x") == 1
    assert "bitsets" in capsys.readouterr().err


def test_config_must_be_object(cycle_doc, tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("[1, 2]", encoding="utf-8")
    assert run_cli("solve", "--instance", cycle_doc, "--config", config) == 1
    assert "JSON object" in capsys.readouterr().err
