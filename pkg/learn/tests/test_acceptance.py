"""Acceptance gate: four binding criteria, one PASS/FAIL line each.

S1  metric identities -- evaluate() matches closed forms on confusion inputs
S2  sampling contract -- parity and caps over randomized inputs, no violations
S3  online trend      -- balanced-accuracy floors and diff cap within budget
S4  offline trend     -- all-but-one at least matches one-vs-all on average
"""

from __future__ import annotations

import time

import numpy as np

from labellens_learn.metrics import METRIC_NAMES, aggregate, evaluate
from labellens_learn.protocols import run_offline, run_online
from learnhelpers import (
    CONFUSIONS,
    check_contract,
    closed_form,
    confusion_frame,
    random_frames,
    same,
)

ONLINE_RUNS = 20
OFFLINE_RUNS = 10
ONLINE_BUDGET_S = 300.0
SAMPLING_TRIALS = 100
#: Mean balanced accuracy each dataset variant must reach online.
ONLINE_FLOORS = {"G": 0.80, "I": 0.70}
ONLINE_DIFF_CAP = 0.20


def check(tag: str, ok: bool, detail: str) -> None:
    print(f"{tag}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{tag} failed: {detail}"


def test_s1_metric_identities():
    mismatches = []
    for tp, fn, tn, fp in CONFUSIONS:
        result = evaluate(*confusion_frame(tp, fn, tn, fp))
        expected = closed_form(tp, fn, tn, fp)
        mismatches += [
            (tp, fn, tn, fp, name)
            for name in METRIC_NAMES
            if not same(result[name], expected[name])
        ]
    # Per-instance diff: class accuracies (1.0, 0.6) and (0.6, 1.0) differ by
    # 0.4 inside each instance, so the mean diff is 0.4 even though the class
    # accuracies averaged across instances are identical.
    pair = [
        evaluate(*confusion_frame(6, 4, 10, 0)),  # accP=1.0, accD=0.6
        evaluate(*confusion_frame(10, 0, 6, 4)),  # accP=0.6, accD=1.0
    ]
    mean = aggregate(pair)
    averaged_first = abs(
        np.mean([p["accP"] for p in pair]) - np.mean([p["accD"] for p in pair])
    )
    paired_ok = mean["diff"] == 0.4 and averaged_first < 1e-15
    check(
        "S1",
        not mismatches and paired_ok,
        f"{len(CONFUSIONS)} confusion inputs exact ({len(mismatches)} mismatches); "
        f"paired example diff={mean['diff']:.1f} vs averaged-first {averaged_first:.1f}",
    )


def test_s2_sampling_contract():
    rng = np.random.default_rng(2024)
    violations = 0
    for trial in range(SAMPLING_TRIALS):
        frames = random_frames(rng)
        try:
            check_contract(frames, seed=trial)
        except AssertionError:
            violations += 1
    check("S2", violations == 0, f"{SAMPLING_TRIALS} randomized trials, {violations} violations")


def test_s3_online_trend(corpus_runs):
    assert len(corpus_runs) >= ONLINE_RUNS
    subset = corpus_runs[:ONLINE_RUNS]
    start = time.perf_counter()
    details = []
    ok = True
    for variant, floor in ONLINE_FLOORS.items():
        result = run_online(subset, variant, seed=0)
        mean = result["mean"]
        ok = ok and mean["balanced_accuracy"] >= floor and mean["diff"] <= ONLINE_DIFF_CAP
        details.append(
            f"{variant}: bal={mean['balanced_accuracy']:.3f} (floor {floor:.2f})"
            f" diff={mean['diff']:.3f} (cap {ONLINE_DIFF_CAP:.2f})"
            f" n={len(result['evaluations'])} skipped={len(result['skipped'])}"
        )
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < ONLINE_BUDGET_S
    check("S3", ok, "; ".join(details) + f"; {elapsed:.1f}s of {ONLINE_BUDGET_S:.0f}s budget")


def _model_table(result: dict) -> str:
    """One aggregated line per trained model, regardless of how it scored."""
    lines = [f"{'model':>24} {'evals':>6} " + " ".join(f"{m:>10}" for m in METRIC_NAMES)]
    groups: dict[str, list[dict]] = {}
    for row in result["evaluations"]:
        groups.setdefault(row["train"], []).append(row)
    for tag, rows in sorted(groups.items()):
        mean = aggregate(rows)
        lines.append(
            f"{tag:>24} {len(rows):>6} " + " ".join(f"{mean[m]:>10.4f}" for m in METRIC_NAMES)
        )
    mean = result["mean"]
    lines.append("mean: " + " ".join(f"{m}={mean[m]:.4f}" for m in METRIC_NAMES))
    return "\n".join(lines)


def test_s4_offline_trend(corpus_runs):
    assert len(corpus_runs) >= OFFLINE_RUNS
    subset = corpus_runs[:OFFLINE_RUNS]
    results = {
        protocol: run_offline(subset, protocol, seed=0)
        for protocol in ("one_vs_all", "all_but_one")
    }
    for protocol, result in results.items():  # both tables, whatever the verdict
        print(f"\n{protocol}:")
        print(_model_table(result))
    one_vs_all = results["one_vs_all"]["mean"]["balanced_accuracy"]
    all_but_one = results["all_but_one"]["mean"]["balanced_accuracy"]
    check(
        "S4",
        all_but_one >= one_vs_all,
        f"mean balanced accuracy: all_but_one={all_but_one:.4f} >= one_vs_all={one_vs_all:.4f}",
    )
