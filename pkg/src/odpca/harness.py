"""Star-topology streaming simulator.

Feeds identical sample streams to every requested algorithm, tracks error
trajectories against a known ground truth, counts communication analytically
(real entries moved node -> center), and times the local and aggregate
phases with a monotonic clock.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import aggregation
from .datagen import SeededStream, SpikedModel, sample_gaussian, sample_heavy_shuffled
from .datasets import center_grid_cells, partition_stream
from .errors import IngestionError
from .subspace import projection_distance

ALGORITHMS = ("odpca", "dpca", "full", "baseline")

# seed stride separating scaling-experiment cells; larger than any sane
# replication count so cells never share sampling seeds
_CELL_SEED_STRIDE = 100_003


@dataclass(frozen=True)
class SyntheticSource:
    """Stream drawn from a spiked model; ground truth is known."""

    model: SpikedModel
    sampler: str = "gaussian"  # "gaussian" | "heavy"

    def describe(self) -> dict:
        return {
            "kind": "synthetic",
            "sampler": self.sampler,
            "ambient_dim": self.model.ambient_dim,
            "rank": self.model.rank,
            "spikes": self.model.eigenvalues[: self.model.rank].tolist(),
            "bulk": float(self.model.eigenvalues[-1]),
        }


@dataclass(frozen=True)
class MatrixSource:
    """Pre-loaded dataset rows; ground truth is unknown unless supplied."""

    data: np.ndarray
    label: str = "dataset"
    ground_truth: np.ndarray | None = None
    center_per_batch: bool = False

    def describe(self) -> dict:
        return {
            "kind": "matrix",
            "label": self.label,
            "rows": int(self.data.shape[0]),
            "ambient_dim": int(self.data.shape[1]),
            "center_per_batch": self.center_per_batch,
        }


@dataclass(frozen=True)
class RunConfig:
    """One simulated run: m nodes, n samples per node per round, T rounds.

    The total sample count is N = T * m * n; for the one-shot and pooled
    algorithms the same N samples are pooled (dpca resplits them into m
    blocks of n*T), so every algorithm sees identical data.
    """

    nodes: int
    batch_size: int
    horizon: int
    rank: int
    ambient_dim: int
    surplus: int = 0
    seed: int = 0
    source: SyntheticSource | MatrixSource | None = None
    algorithms: tuple[str, ...] = ALGORITHMS
    workers: int = 1

    @property
    def total_samples(self) -> int:
        return self.horizon * self.nodes * self.batch_size

    @property
    def projection_rank(self) -> int:
        return self.rank + self.surplus

    def validate(self):
        if min(self.nodes, self.batch_size, self.horizon, self.rank) < 1:
            raise ValueError("nodes, batch_size, horizon, and rank must all be >= 1")
        if self.surplus < 0:
            raise ValueError(f"surplus must be >= 0, got {self.surplus}")
        if self.projection_rank > self.ambient_dim:
            raise ValueError(
                f"projection rank {self.projection_rank} exceeds ambient dim {self.ambient_dim}"
            )
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}; expected subset of {ALGORITHMS}")
        if self.source is None:
            raise ValueError("config needs a data source")

    def echo(self) -> dict:
        return {
            "nodes": self.nodes,
            "batch_size": self.batch_size,
            "horizon": self.horizon,
            "rank": self.rank,
            "surplus": self.surplus,
            "ambient_dim": self.ambient_dim,
            "seed": self.seed,
            "algorithms": list(self.algorithms),
            "total_samples": self.total_samples,
            "source": self.source.describe() if self.source is not None else None,
            "dpca_comparator": "all-N",  # dpca reprocesses every sample, not the last batch
        }


@dataclass
class PhaseTimes:
    """Wall-clock split of one algorithm run (seconds)."""

    local_s: float
    aggregate_s: float
    total_s: float


@dataclass
class RunReport:
    """Everything one run produces, minus the fitted bases' provenance.

    ``per_round_error`` tracks the streaming algorithm's round aggregates
    against ground truth (NaN without one); comm_entries counts real numbers
    moved node -> center.
    """

    config_echo: dict
    per_round_error: list[float]
    per_round_wall_s: list[float]
    final_error: dict[str, float]
    comm_entries: dict[str, int]
    wall_times: dict[str, PhaseTimes]
    data_hash: str
    bases: dict[str, np.ndarray] = field(repr=False, default_factory=dict)


def comm_entry_counts(config: RunConfig) -> dict[str, int]:
    """Closed-form node -> center transfer counts, in real entries."""
    d = config.ambient_dim
    m = config.nodes
    counts = {
        "odpca": config.horizon * m * d * config.projection_rank,
        "dpca": m * d * config.projection_rank,
        "baseline": m * d * (d + 1),
        "full": config.total_samples * d,  # raw samples shipped to the center
    }
    return {a: counts[a] for a in config.algorithms}


def _resolve_source(config: RunConfig) -> tuple[np.ndarray, np.ndarray | None]:
    """Materialize exactly N pooled rows plus the ground truth if known."""
    n_total = config.total_samples
    src = config.source
    if isinstance(src, SyntheticSource):
        if src.model.ambient_dim != config.ambient_dim:
            raise ValueError("model dimension does not match config.ambient_dim")
        stream = SeededStream(config.seed)
        sampler = sample_gaussian if src.sampler == "gaussian" else sample_heavy_shuffled
        return sampler(src.model, n_total, stream), src.model.ground_truth
    if isinstance(src, MatrixSource):
        data = src.data
        if data.shape[1] != config.ambient_dim:
            raise ValueError("dataset width does not match config.ambient_dim")
        if data.shape[0] < n_total:
            raise IngestionError(f"stream needs {n_total} rows, source has {data.shape[0]}")
        if src.center_per_batch:
            return (
                center_grid_cells(data, config.nodes, config.batch_size, config.horizon),
                src.ground_truth,
            )
        return np.asarray(data[:n_total], dtype=float), src.ground_truth
    raise TypeError(f"unsupported source type {type(src).__name__}")


def _node_map(workers: int, m: int) -> Callable:
    if workers <= 1 or m <= 1:
        return None
    return ThreadPoolExecutor(max_workers=min(workers, m))


def _error_to(basis: np.ndarray, truth: np.ndarray | None) -> float:
    if truth is None:
        return math.nan
    return projection_distance(basis, truth)


def run_stream(config: RunConfig) -> RunReport:
    """Run every requested algorithm on one shared sample stream."""
    config.validate()
    pool_rows, truth = _resolve_source(config)
    data_hash = hashlib.sha256(np.ascontiguousarray(pool_rows).tobytes()).hexdigest()

    m, n, horizon = config.nodes, config.batch_size, config.horizon
    proj_rank = config.projection_rank
    grid = partition_stream(pool_rows, m, n, horizon)
    executor = _node_map(config.workers, m)
    node_apply = executor.map if executor is not None else map

    final_error: dict[str, float] = {}
    wall_times: dict[str, PhaseTimes] = {}
    bases: dict[str, np.ndarray] = {}
    per_round_error: list[float] = []
    per_round_wall: list[float] = []

    try:
        for algo in config.algorithms:
            if algo == "odpca":
                basis, times = _run_odpca(
                    config, grid, truth, node_apply, per_round_error, per_round_wall
                )
            elif algo == "dpca":
                blocks = [pool_rows[l * n * horizon : (l + 1) * n * horizon] for l in range(m)]
                basis, times = _run_one_shot(
                    lambda: list(node_apply(lambda b: aggregation.local_top_k(b, proj_rank), blocks)),
                    lambda locals_: aggregation.aggregate_local(locals_, config.rank),
                )
            elif algo == "full":
                basis, times = _run_pooled(pool_rows, config.rank)
            else:  # baseline
                blocks = [pool_rows[l * n * horizon : (l + 1) * n * horizon] for l in range(m)]
                basis, times = _run_one_shot(
                    lambda: list(node_apply(aggregation.node_spectrum, blocks)),
                    lambda spectra: aggregation.merge_spectra(spectra, config.rank),
                )
            final_error[algo] = _error_to(basis, truth)
            wall_times[algo] = times
            bases[algo] = basis
    finally:
        if executor is not None:
            executor.shutdown()

    return RunReport(
        config_echo=config.echo(),
        per_round_error=per_round_error,
        per_round_wall_s=per_round_wall,
        final_error=final_error,
        comm_entries=comm_entry_counts(config),
        wall_times=wall_times,
        data_hash=data_hash,
        bases=bases,
    )


def _run_odpca(config, grid, truth, node_apply, per_round_error, per_round_wall):
    t_start = time.perf_counter()
    local_s = 0.0
    aggregate_s = 0.0
    state = aggregation.odpca_init(config.ambient_dim, config.rank, config.horizon)
    proj_rank = config.projection_rank
    for round_batches in grid:
        r_start = time.perf_counter()
        locals_ = list(node_apply(lambda b: aggregation.local_top_k(b, proj_rank), round_batches))
        t_mid = time.perf_counter()
        round_basis = aggregation.aggregate_local(locals_, config.rank)
        state = aggregation.odpca_accumulate(state, round_basis)
        t_end = time.perf_counter()
        local_s += t_mid - r_start
        aggregate_s += t_end - t_mid
        per_round_error.append(_error_to(round_basis, truth))
        per_round_wall.append(t_end - r_start)
    t_fin = time.perf_counter()
    basis = aggregation.odpca_finalize(state)
    t_stop = time.perf_counter()
    aggregate_s += t_stop - t_fin  # final eigendecomposition happens at the center
    return basis, PhaseTimes(local_s, aggregate_s, t_stop - t_start)


def _run_one_shot(local_phase, aggregate_phase):
    t_start = time.perf_counter()
    locals_ = local_phase()
    t_mid = time.perf_counter()
    basis = aggregate_phase(locals_)
    t_stop = time.perf_counter()
    return basis, PhaseTimes(t_mid - t_start, t_stop - t_mid, t_stop - t_start)


def _run_pooled(pool_rows, rank):
    t_start = time.perf_counter()
    basis = aggregation.full_pca(pool_rows, rank)
    t_stop = time.perf_counter()
    # centralized: all work happens at the aggregation center
    return basis, PhaseTimes(0.0, t_stop - t_start, t_stop - t_start)


@dataclass(frozen=True)
class ScalingRow:
    """One cell of a sample-scaling sweep."""

    factor: int
    total_samples: int
    mean_error: float
    std_error: float
    replications: int


def scaling_experiment(
    base: RunConfig,
    factors: Sequence[int],
    replications: int = 10,
    scale: str = "horizon",
) -> list[ScalingRow]:
    """Streaming-error decay as the total sample count N = T m n grows.

    Each factor multiplies the horizon (default) or the per-node batch size;
    every (factor, replication) cell samples with its own seed, so repeated
    factors act as independent sanity cells.
    """
    if replications < 10:
        raise ValueError(f"need at least 10 replications, got {replications}")
    if scale not in ("horizon", "batch_size"):
        raise ValueError(f"scale must be 'horizon' or 'batch_size', got {scale!r}")
    if len(factors) == 0:
        raise ValueError("need at least one factor")
    rows = []
    for idx, factor in enumerate(factors):
        if int(factor) != factor or factor < 1:
            raise ValueError(f"factors must be positive integers, got {factor!r}")
        factor = int(factor)
        if scale == "horizon":
            cfg = replace(base, horizon=base.horizon * factor)
        else:
            cfg = replace(base, batch_size=base.batch_size * factor)
        cfg = replace(cfg, algorithms=("odpca",))
        errors = []
        for r in range(replications):
            seed = base.seed + (idx + 1) * _CELL_SEED_STRIDE + r
            report = run_stream(replace(cfg, seed=seed))
            err = report.final_error["odpca"]
            if not math.isfinite(err) or err <= 0.0:
                raise ValueError(
                    "scaling experiment needs a known ground truth with nonzero error"
                )
            errors.append(err)
        rows.append(
            ScalingRow(
                factor=factor,
                total_samples=cfg.total_samples,
                mean_error=float(np.mean(errors)),
                std_error=float(np.std(errors)),
                replications=replications,
            )
        )
    return rows


@dataclass(frozen=True)
class TimingRow:
    """Median phase timings for one algorithm at one configuration."""

    algorithm: str
    local_s: float
    aggregate_s: float
    total_s: float
    total_std_s: float
    local_batch_rows: int
    repetitions: int


def timing_probe(config: RunConfig, repetitions: int = 3) -> list[TimingRow]:
    """Median-of-repetitions wall-clock breakdown for each algorithm.

    The streaming algorithm's local eigendecompositions see batches of
    ``batch_size`` rows; the one-shot algorithms see ``batch_size * horizon``
    rows per node. That asymmetry is the entire point of the probe.
    """
    if repetitions < 3:
        raise ValueError(f"need at least 3 repetitions, got {repetitions}")
    reports = [run_stream(config) for _ in range(repetitions)]
    per_node_rows = {
        "odpca": config.batch_size,
        "dpca": config.batch_size * config.horizon,
        "baseline": config.batch_size * config.horizon,
        "full": config.total_samples,
    }
    rows = []
    for algo in config.algorithms:
        locals_ = [r.wall_times[algo].local_s for r in reports]
        aggs = [r.wall_times[algo].aggregate_s for r in reports]
        totals = [r.wall_times[algo].total_s for r in reports]
        rows.append(
            TimingRow(
                algorithm=algo,
                local_s=float(np.median(locals_)),
                aggregate_s=float(np.median(aggs)),
                total_s=float(np.median(totals)),
                total_std_s=float(np.std(totals)),
                local_batch_rows=per_node_rows[algo],
                repetitions=repetitions,
            )
        )
    return rows
