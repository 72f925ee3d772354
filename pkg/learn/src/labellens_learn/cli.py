"""Command-line interface.

Subcommands::

    labellens-learn offline  train/evaluate under an instance-split protocol
    labellens-learn online   penultimate-iteration training, final-iteration test
    labellens-learn analyze  correlations, PCA spectrum, and plots

All three read collected run directories (``manifest.json`` + CSVs) found
recursively under ``--data``.  Exit codes: 0 success, 1 errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .analyze import (
    component_label_correlation,
    correlation_summary,
    significant_components,
    write_plots,
)
from .data import MANIFEST_NAME, TARGET, Run, discover_runs, multi_iteration
from .metrics import METRIC_NAMES
from .protocols import OFFLINE_PROTOCOLS, offline_frames, run_offline, run_online

#: Output CSV schema -> key in an evaluation row.
METRICS_COLUMNS = {
    "model_group": "train",
    "test_instance": "eval",
    "acc_pareto": "accP",
    "acc_dominated": "accD",
    "diff": "diff",
    "precision": "precision",
    "f1": "f1",
}


def _print_result(result: dict, verbose: bool) -> None:
    if verbose:
        print(f"{'train':>24} {'eval':>14} " + " ".join(f"{m:>18}" for m in METRIC_NAMES))
        for row in result["evaluations"]:
            print(
                f"{row['train']:>24} {row['eval']:>14} "
                + " ".join(f"{row[m]:>18.4f}" for m in METRIC_NAMES)
            )
        for instance, reason in result.get("skipped", ()):
            print(f"{instance:>24} skipped: {reason}")
    mean = result["mean"]
    print(f"{result['protocol']}: " + " ".join(f"{m}={mean[m]:.4f}" for m in METRIC_NAMES))


def _register_outputs(outdir: Path, names: list[str], runs: list[Run], seed: int, variant: str) -> None:
    """Record, in the output manifest, which inputs produced which files."""
    manifest_path = outdir / MANIFEST_NAME
    manifest = {"outputs": {}}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    inputs = [str(run.run_dir / MANIFEST_NAME) for run in runs]
    for name in names:
        manifest["outputs"][name] = {"inputs": inputs, "seed": seed, "variant": variant}
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _write_metrics(result: dict, args: argparse.Namespace, runs: list[Run]) -> None:
    if not args.out:
        return
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = pd.DataFrame(result["evaluations"])
    table = pd.DataFrame({column: rows[key] for column, key in METRICS_COLUMNS.items()})
    name = f"metrics_{result['protocol']}.csv"
    table.to_csv(outdir / name, index=False)
    print(outdir / name)
    _register_outputs(outdir, [name], runs, args.seed, args.variant)


def cmd_offline(args: argparse.Namespace) -> int:
    runs = multi_iteration(discover_runs(args.data))
    result = run_offline(runs, args.protocol, args.variant, args.seed, args.workers)
    _print_result(result, args.verbose)
    _write_metrics(result, args, runs)
    return 0


def cmd_online(args: argparse.Namespace) -> int:
    # No multi-iteration pre-filter here: run_online itself skips
    # single-iteration runs and reports them, rather than hiding them.
    runs = discover_runs(args.data)
    result = run_online(runs, args.variant, args.seed, args.workers)
    _print_result(result, args.verbose)
    _write_metrics(result, args, runs)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    runs = [r for r in multi_iteration(discover_runs(args.data)) if r.has_normalized()]
    frames = offline_frames(runs, args.variant)
    table = correlation_summary(frames)
    print("feature-target correlation across instances:")
    print(table.to_string(float_format=lambda v: f"{v: .3f}"))
    pooled = pd.concat(frames.values(), ignore_index=True)
    kept = significant_components(pooled)
    component = float(np.nanmean([component_label_correlation(f) for f in frames.values()]))
    print(f"eigenvalues above 1 (pooled): {kept}")
    print(f"mean max |component-target correlation| per instance: {component:.3f}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        per_iteration = pd.concat(
            (
                run.normalized(args.variant, iteration)
                for run in runs
                for iteration in range(2, run.iterations + 1)
            ),
            ignore_index=True,
        )
        written = [path.name for path in write_plots(frames, per_iteration, args.out)]
        table.to_csv(outdir / "correlations.csv")
        written.append("correlations.csv")
        for name in written:
            print(outdir / name)
        _register_outputs(outdir, written, runs, args.seed, args.variant)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labellens-learn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", required=True, help="directory scanned recursively for runs")
        p.add_argument("--variant", choices=("G", "I"), default="G")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1, help="parallel fit/score workers")
        p.add_argument("--out", default=None)
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("offline", help="instance-split training and evaluation")
    common(p)
    p.add_argument("--protocol", choices=OFFLINE_PROTOCOLS, default="all_but_one")
    p.set_defaults(func=cmd_offline)

    p = sub.add_parser("online", help="train mid-solve, predict the final iteration")
    common(p)
    p.set_defaults(func=cmd_online)

    p = sub.add_parser("analyze", help="correlations, PCA, plots")
    common(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
