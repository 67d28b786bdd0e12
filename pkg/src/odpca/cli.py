"""Benchmark command-line driver.

Subcommands:
  synth    synthetic replications, optionally with a sample-scaling sweep
  lowrank  rank-K approximation task with errors normalized to the baseline
  kmeans   Lloyd clustering task on projected data
  bench    projection-dimension (Z) sweep of per-phase wall times

Every subcommand writes a CSV report (schema pinned in a leading comment
line) and a JSON summary next to it. Reruns with the same seed are
byte-identical except the timing columns / the "timing" JSON key.

Exit codes: 0 success, 1 argument error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .datagen import default_spikes, make_spiked_model
from .datasets import DatasetSpec, load_dataset
from .errors import OdpcaError
from .harness import (
    ALGORITHMS,
    MatrixSource,
    RunConfig,
    RunReport,
    SyntheticSource,
    run_stream,
    scaling_experiment,
    timing_probe,
)
from .tasks import clustering_cost_ratio, lowrank_error, relative_error

REPORT_SCHEMA = "algorithm,round,error,comm_entries,wall_ms"
BENCH_SCHEMA = "algorithm,z,phase,wall_ms,local_batch_rows"
SCALING_SCHEMA = "factor,total_samples,mean_error,std_error,replications"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the report contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return "%.17g" % value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="odpca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_dataset=False, z_list=False):
        p.add_argument("--d", type=int, default=None, help="ambient dimension (synthetic)")
        p.add_argument("--K", type=int, default=5, help="target rank")
        if z_list:
            p.add_argument(
                "--Z", default="0", help="comma-separated surplus values to sweep"
            )
        else:
            p.add_argument("--Z", type=int, default=0, help="projection-dimension surplus")
        p.add_argument("--m", type=int, default=4, help="number of nodes")
        p.add_argument("--n", type=int, default=100, help="samples per node per round")
        p.add_argument("--T", type=int, default=5, help="number of rounds")
        p.add_argument("--seed", type=int, default=0, help="sampling seed")
        p.add_argument("--reps", type=int, default=1, help="replications")
        p.add_argument(
            "--algorithms",
            default=",".join(ALGORITHMS),
            help="comma-separated subset of " + ",".join(ALGORITHMS),
        )
        p.add_argument("--out", required=True, help="CSV output path (JSON written alongside)")
        p.add_argument("--spikes", default=None, help="comma-separated spike eigenvalues")
        p.add_argument("--bulk", type=float, default=1.0, help="bulk eigenvalue (synthetic)")
        p.add_argument("--model-seed", type=int, default=0, help="seed of the synthetic basis")
        p.add_argument("--workers", type=int, default=1, help="node worker threads")
        if with_dataset:
            p.add_argument("--dataset", default=None, help="path to a dataset file")
            p.add_argument("--format", choices=("csv", "libsvm"), default="csv")
            p.add_argument("--center", choices=("none", "global", "per_batch"), default="none")
            p.add_argument("--header", action="store_true", help="skip the first CSV line")
            p.add_argument("--limit-rows", type=int, default=None)
            p.add_argument("--shuffle-seed", type=int, default=None)

    p_synth = sub.add_parser("synth", help="synthetic benchmark replications")
    add_common(p_synth)
    p_synth.add_argument(
        "--factors", default=None, help="comma-separated sample multipliers for a scaling sweep"
    )
    p_synth.set_defaults(func=_cmd_synth)

    p_low = sub.add_parser("lowrank", help="rank-K approximation task")
    add_common(p_low, with_dataset=True)
    p_low.set_defaults(func=_cmd_lowrank)

    p_km = sub.add_parser("kmeans", help="Lloyd clustering task on projected data")
    add_common(p_km, with_dataset=True)
    p_km.add_argument("--clusters", type=int, default=10, help="number of clusters")
    p_km.set_defaults(func=_cmd_kmeans)

    p_bench = sub.add_parser("bench", help="projection-dimension timing sweep")
    add_common(p_bench, z_list=True)
    p_bench.set_defaults(func=_cmd_bench)

    return parser


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}") from None


def _build_config(args, surplus: int | None = None) -> RunConfig:
    algorithms = tuple(a for a in args.algorithms.split(",") if a)
    dataset = getattr(args, "dataset", None)
    if dataset is not None:
        spec = DatasetSpec(
            path=dataset,
            format=args.format,
            center="global" if args.center == "global" else "none",
            limit_rows=args.limit_rows,
            shuffle_seed=args.shuffle_seed,
            header=args.header,
        )
        data = load_dataset(spec)
        source = MatrixSource(
            data=data,
            label=Path(dataset).name,
            center_per_batch=args.center == "per_batch",
        )
        ambient = data.shape[1]
    else:
        if args.d is None:
            if hasattr(args, "dataset"):
                raise ValueError("--dataset is required unless --d selects a synthetic source")
            raise ValueError("--d is required for a synthetic source")
        if args.spikes is not None:
            spikes = [float(t) for t in args.spikes.split(",") if t]
        else:
            spikes = default_spikes(args.K)
        model = make_spiked_model(args.d, args.K, spikes, args.bulk, args.model_seed)
        source = SyntheticSource(model)
        ambient = args.d
    return RunConfig(
        nodes=args.m,
        batch_size=args.n,
        horizon=args.T,
        rank=args.K,
        ambient_dim=ambient,
        surplus=surplus if surplus is not None else args.Z,
        seed=args.seed,
        source=source,
        algorithms=algorithms,
        workers=args.workers,
    )


def _replicated_reports(config: RunConfig, reps: int) -> list[RunReport]:
    if reps < 1:
        raise ValueError(f"--reps must be >= 1, got {reps}")
    return [run_stream(replace(config, seed=config.seed + r)) for r in range(reps)]


def _write_report_csv(path, config: RunConfig, reports: list[RunReport]):
    """One row per streaming round plus a summary row per algorithm.

    Errors and comm counts are means over replications (deterministic);
    wall_ms is the replication mean as well but excluded from byte-level
    determinism guarantees.
    """
    lines = [f"# odpca-report v1 (rows: per-round for odpca, then one summary row per algorithm)"]
    lines.append(REPORT_SCHEMA)
    m, d = config.nodes, config.ambient_dim
    per_round_comm = m * d * config.projection_rank
    if "odpca" in config.algorithms:
        rounds = np.array([r.per_round_error for r in reports])
        walls = np.array([r.per_round_wall_s for r in reports])
        for t in range(config.horizon):
            err = float(np.mean(rounds[:, t]))
            wall_ms = float(np.mean(walls[:, t])) * 1e3
            lines.append(f"odpca,{t + 1},{_fmt(err)},{per_round_comm},{wall_ms:.3f}")
    for algo in config.algorithms:
        err = float(np.mean([r.final_error[algo] for r in reports]))
        comm = reports[0].comm_entries[algo]
        wall_ms = float(np.mean([r.wall_times[algo].total_s for r in reports])) * 1e3
        lines.append(f"{algo},final,{_fmt(err)},{comm},{wall_ms:.3f}")
    Path(path).write_text("\n".join(lines) + "\n")


def _timing_summary(reports: list[RunReport]) -> dict:
    out = {}
    algos = reports[0].wall_times.keys()
    for algo in algos:
        out[algo] = {
            "local_ms": float(np.median([r.wall_times[algo].local_s for r in reports])) * 1e3,
            "aggregate_ms": float(np.median([r.wall_times[algo].aggregate_s for r in reports])) * 1e3,
            "total_ms": float(np.median([r.wall_times[algo].total_s for r in reports])) * 1e3,
        }
    return out


def _base_summary(command: str, config: RunConfig, reports: list[RunReport], reps: int) -> dict:
    final = {
        algo: {
            "mean": float(np.mean([r.final_error[algo] for r in reports])),
            "median": float(np.median([r.final_error[algo] for r in reports])),
            "std": float(np.std([r.final_error[algo] for r in reports])),
        }
        for algo in config.algorithms
    }
    return {
        "version": 1,
        "command": command,
        "config": config.echo(),
        "replications": reps,
        "final_error": final,
        "comm_entries": reports[0].comm_entries,
        "data_hash": reports[0].data_hash,
        "timing": _timing_summary(reports),
    }


def _write_json(path, summary: dict):
    Path(path).with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _cmd_synth(args) -> int:
    config = _build_config(args)
    reports = _replicated_reports(config, args.reps)
    _write_report_csv(args.out, config, reports)
    summary = _base_summary("synth", config, reports, args.reps)
    if args.factors is not None:
        factors = _parse_int_list(args.factors, "--factors")
        rows = scaling_experiment(config, factors, replications=max(args.reps, 10))
        summary["scaling"] = [
            {
                "factor": row.factor,
                "total_samples": row.total_samples,
                "mean_error": row.mean_error,
                "std_error": row.std_error,
                "replications": row.replications,
            }
            for row in rows
        ]
        scaling_path = Path(args.out).with_suffix(".scaling.csv")
        lines = ["# odpca-scaling v1", SCALING_SCHEMA]
        for row in rows:
            lines.append(
                f"{row.factor},{row.total_samples},{_fmt(row.mean_error)},"
                f"{_fmt(row.std_error)},{row.replications}"
            )
        scaling_path.write_text("\n".join(lines) + "\n")
    _write_json(args.out, summary)
    return 0


def _task_bases(config: RunConfig, reports: list[RunReport]):
    if "baseline" not in config.algorithms:
        raise ValueError("task normalization needs the 'baseline' algorithm in --algorithms")
    return reports[0].bases


def _cmd_lowrank(args) -> int:
    config = _build_config(args)
    reports = _replicated_reports(config, args.reps)
    bases = _task_bases(config, reports)
    pooled, _ = _pooled_rows(config)
    absolute = {algo: lowrank_error(pooled, basis) for algo, basis in bases.items()}
    relative = {
        algo: relative_error(err, absolute["baseline"]) for algo, err in absolute.items()
    }
    _write_report_csv(args.out, config, reports)
    summary = _base_summary("lowrank", config, reports, args.reps)
    summary["lowrank"] = {"absolute": absolute, "relative_to_baseline": relative}
    _write_json(args.out, summary)
    return 0


def _cmd_kmeans(args) -> int:
    config = _build_config(args)
    reports = _replicated_reports(config, args.reps)
    bases = _task_bases(config, reports)
    pooled, _ = _pooled_rows(config)
    seeds = [args.seed + 10_000 + i for i in range(max(args.reps, 5))]
    ratios = {
        algo: clustering_cost_ratio(basis, bases["baseline"], pooled, args.clusters, seeds)
        for algo, basis in bases.items()
    }
    _write_report_csv(args.out, config, reports)
    summary = _base_summary("kmeans", config, reports, args.reps)
    summary["kmeans"] = {
        "clusters": args.clusters,
        "cost_ratio_to_baseline": ratios,
        "clustering_seeds": seeds,
    }
    _write_json(args.out, summary)
    return 0


def _pooled_rows(config: RunConfig):
    from .harness import _resolve_source

    return _resolve_source(config)


def _cmd_bench(args) -> int:
    z_values = _parse_int_list(str(args.Z), "--Z")
    lines = ["# odpca-bench v1", BENCH_SCHEMA]
    sweep = []
    for z in z_values:
        config = _build_config(args, surplus=z)
        rows = timing_probe(config, repetitions=max(args.reps, 3))
        for row in rows:
            for phase, seconds in (("local", row.local_s), ("aggregate", row.aggregate_s)):
                lines.append(
                    f"{row.algorithm},{z},{phase},{seconds * 1e3:.3f},{row.local_batch_rows}"
                )
            sweep.append(
                {
                    "algorithm": row.algorithm,
                    "z": z,
                    "local_ms": row.local_s * 1e3,
                    "aggregate_ms": row.aggregate_s * 1e3,
                    "total_ms": row.total_s * 1e3,
                    "total_std_ms": row.total_std_s * 1e3,
                    "local_batch_rows": row.local_batch_rows,
                    "repetitions": row.repetitions,
                }
            )
    Path(args.out).write_text("\n".join(lines) + "\n")
    config = _build_config(args, surplus=z_values[0])
    summary = {
        "version": 1,
        "command": "bench",
        "config": config.echo(),
        "timing": {"sweep": sweep},
        "note": "wall times are reported, not gated; see README",
    }
    _write_json(args.out, summary)
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"odpca: error: {exc}", file=sys.stderr)
        return 1
    except (OdpcaError, OSError) as exc:
        print(f"odpca: error: {exc}", file=sys.stderr)
        return 2


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
