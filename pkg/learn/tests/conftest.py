"""Session fixtures: a run corpus produced entirely through the solver CLI.

The learning package consumes solver runs only through their published file
format, so the corpus is built by invoking the ``labellens`` executable the
way a user would: generate instance documents, collect runs single-threaded
(byte-reproducible), normalize them, and read back the directories.
"""

from __future__ import annotations

import shutil
import subprocess

import pytest

from labellens_learn.data import discover_runs, multi_iteration

GENERATOR_CLASSES = ("uniform", "cluster", "tight")
PER_CLASS = 10


def solver_cli(*args) -> str:
    executable = shutil.which("labellens")
    assert executable, "solver CLI `labellens` not found on PATH"
    command = [executable, *map(str, args)]
    proc = subprocess.run(command, capture_output=True, text=True)
    assert proc.returncode == 0, f"labellens {args[0]} failed:\n{proc.stderr}"
    return proc.stdout


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    instances = root / "instances"
    runs = root / "runs"
    instances.mkdir()
    runs.mkdir()
    for klass in GENERATOR_CLASSES:
        solver_cli("gen", "--seed", 0, "--count", PER_CLASS, "--class", klass, "--out", instances)
    collect = ["collect", "--single-thread", "--out", runs]
    for document in sorted(instances.glob("*.txt")):
        collect += ["--instance", document]
    solver_cli(*collect)
    normalize = ["normalize"]
    for run_dir in sorted(path for path in runs.iterdir() if path.is_dir()):
        normalize += ["--run", run_dir]
    solver_cli(*normalize)
    return runs


@pytest.fixture(scope="session")
def corpus_runs(corpus_dir):
    """Multi-iteration runs of the corpus, sorted by instance name."""
    return multi_iteration(discover_runs(corpus_dir))
