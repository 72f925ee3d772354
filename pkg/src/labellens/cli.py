"""Command-line interface.

Subcommands::

    labellens gen            synthesize instances
    labellens solve          solve one or more instances (no telemetry)
    labellens collect        solve and export per-iteration label datasets
    labellens normalize      normalize a collected run's CSVs in place
    labellens summarize      aggregate collected runs into a dataset table
    labellens bench-policies compare selection policies on the same instances
    labellens convert        turn a vehicle-routing document into an instance

Common flags can also come from a JSON ``--config`` file whose keys mirror
the flag names (``instances`` is a list); explicit flags win over the config
file, which wins over defaults.  The output directory falls back to the
``LABELLENS_OUT`` environment variable, then ``./out``.

Exit codes: 0 success, 1 usage/data errors, 2 proven infeasible (``solve``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .dssr import STATUS_OPTIMAL, solve
from .gen import CLASSES, generate_instance
from .instance import (
    NODE_DEMAND,
    RESOURCE_MODES,
    ParseError,
    convert_cvrp,
    load_instance,
    save_instance,
)
from .normalize import (
    OBJECTIVE_STATS_MODES,
    export_normalized_csv,
    normalize_run,
)
from .telemetry import (
    DATASET_VARIANTS,
    Dataset,
    RunCollector,
    export_csv,
    format_float,
    import_csv,
    make_execution_id,
    summarize,
    variant_rows,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA = "labellens-run/1"


def _default_out() -> str:
    return os.environ.get("LABELLENS_OUT", "out")


class _Config:
    """Layered option lookup: explicit flag > config file > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.data: dict = {}
        path = getattr(args, "config", None)
        if path:
            with open(path, encoding="utf-8") as handle:
                self.data = json.load(handle)
            if not isinstance(self.data, dict):
                raise ValueError("config file must hold a JSON object")

    def get(self, key: str, default):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.data:
            return self.data[key]
        return default

    def instances(self) -> list[str]:
        paths = getattr(self.args, "instance", None) or self.data.get("instances") or []
        if isinstance(paths, str):
            paths = [paths]
        if not paths:
            raise ValueError("no instance given (use --instance or a config file)")
        return list(paths)

    def bitsets(self) -> bool:
        value = self.get("bitsets", True)
        if isinstance(value, bool):
            return value
        if value in ("on", "off"):
            return value == "on"
        raise ValueError(f"bad bitsets value {value!r} (expected on/off)")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", action="append", help="instance document (repeatable)")
    parser.add_argument("--policy", choices=("node", "greedy"), default=None)
    parser.add_argument("--split", type=float, default=None, help="forward share of the capacity budget")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--single-thread", dest="single_thread", action="store_true", default=None)
    parser.add_argument("--config", help="JSON file with default options")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labellens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="synthesize instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="node count (default: 6 + seed %% 7)")
    p.add_argument("--count", type=int, default=1, help="generate seeds seed..seed+count-1")
    p.add_argument("--class", dest="klass", choices=CLASSES, default="uniform")
    p.add_argument("--resource-mode", choices=RESOURCE_MODES, default=NODE_DEMAND)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve instances, print cost and path")
    _add_run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("collect", help="solve and export label datasets")
    _add_run_flags(p)
    p.add_argument("--dataset", choices=("G", "I", "both"), default=None)
    p.add_argument("--bitsets", choices=("on", "off"), default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("normalize", help="normalize a collected run in place")
    p.add_argument("--run", action="append", required=True, help="run directory or manifest (repeatable)")
    p.add_argument("--objective-stats", choices=OBJECTIVE_STATS_MODES, default=None)
    p.add_argument("--config", help="JSON file with default options")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("summarize", help="aggregate collected runs")
    p.add_argument("--run", action="append", default=None, help="run directory or manifest (repeatable)")
    p.add_argument("--data", default=None, help="directory scanned recursively for runs")
    p.add_argument("--out", default=None, help="write the table as CSV here")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("bench-policies", help="compare selection policies")
    _add_run_flags(p)
    p.add_argument("--out", default=None, help="write the table as CSV here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("convert", help="convert a vehicle-routing document")
    p.add_argument("--cvrp", required=True, help="TSPLIB-style CVRP file")
    p.add_argument("--out", required=True, help="instance document to write")
    p.add_argument("--prize-scale", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_convert)

    return parser


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args: argparse.Namespace) -> int:
    out_dir = Path(args.out or _default_out())
    out_dir.mkdir(parents=True, exist_ok=True)
    for offset in range(args.count):
        inst = generate_instance(args.seed + offset, args.n, args.klass, args.resource_mode)
        path = out_dir / f"{inst.name}.txt"
        save_instance(inst, path)
        print(path)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _Config(args)
    worst = 0
    for path in cfg.instances():
        inst = load_instance(path)
        result = solve(
            inst,
            policy=cfg.get("policy", "node"),
            split=cfg.get("split", 0.5),
            single_thread=bool(cfg.get("single_thread", False)),
        )
        if result.status == STATUS_OPTIMAL:
            doc_path = " ".join(str(v + 1) for v in result.path)
            print(
                f"{inst.name}: optimal cost {format_float(result.cost)} "
                f"path [{doc_path}] iterations {result.iterations_used}"
            )
        else:
            print(f"{inst.name}: infeasible (no source-dest path fits the budget)")
            worst = 2
    return worst


def _write_run(
    inst,
    instance_path: str,
    result,
    collector: RunCollector,
    out_dir: Path,
    variants: list[str],
    include_bitsets: bool,
    seed: int,
    policy: str,
    split: float,
) -> Path:
    run_dir = out_dir / inst.name
    run_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, dict[str, str]] = {v: {} for v in variants}
    rows: dict[str, dict[str, int]] = {v: {} for v in variants}
    for iteration in collector.iterations:
        all_rows = collector.rows(iteration)
        for variant in variants:
            subset = variant_rows(all_rows, variant)
            name = f"{inst.name}.it{iteration}.{variant}.csv"
            export_csv(subset, run_dir / name, include_bitsets=include_bitsets)
            files[variant][str(iteration)] = name
            rows[variant][str(iteration)] = len(subset)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "instance": inst.name,
        "instance_file": str(instance_path),
        "n": inst.n,
        "capacity": inst.capacity,
        "source": inst.source,
        "dest": inst.dest,
        "resource_mode": inst.resource_mode,
        "seed": seed,
        "policy": policy,
        "split": split,
        "execution_id": collector.execution_id,
        "status": result.status,
        "cost": result.cost,
        "path": result.path,
        "iterations": len(collector.iterations),
        "bitsets": include_bitsets,
        "datasets": variants,
        "files": files,
        "rows": rows,
    }
    with open(run_dir / MANIFEST_NAME, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return run_dir


def cmd_collect(args: argparse.Namespace) -> int:
    cfg = _Config(args)
    out_dir = Path(cfg.get("out", None) or _default_out())
    dataset = cfg.get("dataset", "both")
    variants = list(DATASET_VARIANTS) if dataset == "both" else [dataset]
    policy = cfg.get("policy", "node")
    split = cfg.get("split", 0.5)
    seed = int(cfg.get("seed", 0))
    for path in cfg.instances():
        inst = load_instance(path)
        collector = RunCollector(make_execution_id(inst.name, seed, policy, split))
        result = solve(
            inst,
            policy=policy,
            split=split,
            collector=collector,
            single_thread=bool(cfg.get("single_thread", False)),
        )
        run_dir = _write_run(
            inst, path, result, collector, out_dir, variants, cfg.bitsets(), seed, policy, split
        )
        total = sum(len(collector.rows(it)) for it in collector.iterations)
        print(
            f"{inst.name}: {result.status}, {result.iterations_used or len(collector.iterations)} "
            f"iteration(s), {total} labels -> {run_dir}"
        )
    return 0


def _find_manifest(run: str) -> Path:
    path = Path(run)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} under {run}")
    return path


def cmd_normalize(args: argparse.Namespace) -> int:
    cfg = _Config(args)
    objective_stats = cfg.get("objective_stats", "pooled")
    for run in args.run:
        manifest_path = _find_manifest(run)
        with open(manifest_path, encoding="utf-8") as handle:
            manifest = json.load(handle)
        run_dir = manifest_path.parent
        variants = manifest["datasets"]
        if manifest["iterations"] < 2:
            print(f"{manifest['instance']}: single iteration, nothing to normalize")
            continue
        # The widest collected variant is the statistical universe; G holds
        # every generated label, so prefer it when present.
        universe = "G" if "G" in variants else variants[0]
        rows_by_iteration = {
            int(it): import_csv(run_dir / name) for it, name in manifest["files"][universe].items()
        }
        normalized = normalize_run(
            rows_by_iteration, manifest["capacity"], manifest["n"], objective_stats
        )
        include_bitsets = manifest["bitsets"]
        normalized_files: dict[str, dict[str, str]] = {v: {} for v in variants}
        for iteration, norm_rows in sorted(normalized.items()):
            for variant in variants:
                keep = (
                    norm_rows
                    if variant == "G"
                    else [r for r in norm_rows if r.label_class in ("P", "GI")]
                )
                name = f"{manifest['instance']}.it{iteration}.{variant}.norm.csv"
                export_normalized_csv(keep, run_dir / name, include_bitsets=include_bitsets)
                normalized_files[variant][str(iteration)] = name
        manifest["normalized_files"] = normalized_files
        manifest["objective_stats"] = objective_stats
        with open(manifest_path, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
            handle.write("\n")
        print(f"{manifest['instance']}: normalized iterations {sorted(normalized)}")
    return 0


def _discover_runs(args: argparse.Namespace) -> list[Path]:
    manifests: list[Path] = []
    if args.run:
        manifests.extend(_find_manifest(r) for r in args.run)
    if args.data:
        manifests.extend(sorted(Path(args.data).rglob(MANIFEST_NAME)))
    if not manifests:
        raise ValueError("no runs given (use --run or --data)")
    return manifests


def cmd_summarize(args: argparse.Namespace) -> int:
    datasets: list[Dataset] = []
    for manifest_path in _discover_runs(args):
        with open(manifest_path, encoding="utf-8") as handle:
            manifest = json.load(handle)
        run_dir = manifest_path.parent
        for variant, files in manifest["files"].items():
            for it, name in files.items():
                datasets.append(
                    Dataset(variant, manifest["instance"], int(it), import_csv(run_dir / name))
                )
    table = summarize(datasets)
    header = ("dataset", "group", "instances", "labels", "pareto_pct", "avg_iterations", "avg_labels_per_iteration")
    print(" ".join(f"{h:>24}" if i else f"{h:>8}" for i, h in enumerate(header)))
    for row in table:
        print(
            f"{row['dataset']:>8} {row['group']:>24} {row['instances']:>24} {row['labels']:>24} "
            f"{row['pareto_pct']:>24.2f} {row['avg_iterations']:>24.2f} {row['avg_labels_per_iteration']:>24.2f}"
        )
    if args.out:
        import csv as _csv

        with open(args.out, "w", newline="", encoding="utf-8") as handle:
            writer = _csv.DictWriter(handle, fieldnames=list(header))
            writer.writeheader()
            writer.writerows(table)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _Config(args)
    split = cfg.get("split", 0.5)
    single_thread = bool(cfg.get("single_thread", False))
    paths = cfg.instances()
    instances = [load_instance(p) for p in paths]
    table = []
    costs: dict[str, list[float | None]] = {}
    for policy in ("node", "greedy"):
        started = time.perf_counter()
        attempts = insertions = iterations = 0
        policy_costs: list[float | None] = []
        for inst in instances:
            result = solve(inst, policy=policy, split=split, single_thread=single_thread)
            policy_costs.append(result.cost)
            iterations += result.iterations_used
            for report in result.iterations:
                attempts += report.forward.attempts + report.backward.attempts
                insertions += report.forward.insertions + report.backward.insertions
        elapsed = time.perf_counter() - started
        costs[policy] = policy_costs
        table.append(
            {
                "policy": policy,
                "instances": len(instances),
                "time_s": round(elapsed, 3),
                "attempts": attempts,
                "insertions": insertions,
                "success_pct": round(100.0 * insertions / attempts, 2) if attempts else 0.0,
                "avg_iterations": round(iterations / len(instances), 2),
            }
        )
    match = costs["node"] == costs["greedy"]
    print("attempts count every extension try, including infeasible ones")
    header = ("policy", "instances", "time_s", "attempts", "insertions", "success_pct", "avg_iterations")
    print(" ".join(f"{h:>14}" for h in header))
    for row in table:
        print(" ".join(f"{row[h]:>14}" for h in header))
    print(f"costs match across policies: {'yes' if match else 'NO'}")
    if args.out:
        import csv as _csv

        with open(args.out, "w", newline="", encoding="utf-8") as handle:
            writer = _csv.DictWriter(handle, fieldnames=list(header))
            writer.writeheader()
            writer.writerows(table)
    return 0 if match else 1


def cmd_convert(args: argparse.Namespace) -> int:
    with open(args.cvrp, encoding="utf-8") as handle:
        inst = convert_cvrp(handle.read(), prize_scale=args.prize_scale, seed=args.seed)
    save_instance(inst, args.out)
    print(f"{inst.name}: {inst.n} nodes, capacity {format_float(inst.capacity)} -> {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
