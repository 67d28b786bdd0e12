import hashlib
import math
from dataclasses import replace

import numpy as np
import pytest

from odpca.datagen import SeededStream, sample_gaussian
from odpca.errors import IngestionError
from odpca.harness import (
    MatrixSource,
    RunConfig,
    SyntheticSource,
    comm_entry_counts,
    run_stream,
    scaling_experiment,
    timing_probe,
)


def small_config(source, **overrides):
    base = dict(
        nodes=3,
        batch_size=30,
        horizon=4,
        rank=2,
        ambient_dim=50,
        surplus=1,
        seed=5,
        source=source,
    )
    base.update(overrides)
    return RunConfig(**base)


class TestRunStream:
    def test_reduction_single_node_single_round(self, default_source):
        config = small_config(
            default_source, nodes=1, horizon=1, batch_size=200, surplus=0, rank=5
        )
        report = run_stream(config)
        assert abs(report.final_error["odpca"] - report.final_error["full"]) <= 1e-8

    def test_comm_entries_closed_forms(self, default_source):
        config = small_config(default_source)
        report = run_stream(config)
        m, d, t = config.nodes, config.ambient_dim, config.horizon
        proj = config.rank + config.surplus
        assert report.comm_entries["odpca"] == t * m * d * proj
        assert report.comm_entries["dpca"] == m * d * proj
        assert report.comm_entries["baseline"] == m * d * (d + 1)
        assert report.comm_entries["full"] == config.total_samples * d

    def test_per_round_errors_in_range(self, default_source):
        config = small_config(default_source)
        report = run_stream(config)
        assert len(report.per_round_error) == config.horizon
        bound = math.sqrt(2 * config.rank)
        assert all(0.0 <= e <= bound for e in report.per_round_error)

    def test_determinism_modulo_wall_times(self, default_source):
        config = small_config(default_source)
        a = run_stream(config)
        b = run_stream(config)
        assert a.final_error == b.final_error
        assert a.per_round_error == b.per_round_error
        assert a.comm_entries == b.comm_entries
        assert a.data_hash == b.data_hash
        for algo in config.algorithms:
            np.testing.assert_array_equal(a.bases[algo], b.bases[algo])

    def test_workers_do_not_change_results(self, default_source):
        serial = run_stream(small_config(default_source, workers=1))
        threaded = run_stream(small_config(default_source, workers=3))
        assert serial.final_error == threaded.final_error
        assert serial.per_round_error == threaded.per_round_error

    def test_data_identity_hash(self, default_model, default_source):
        # the pooled stream equals the concatenation of the (node, round) cells
        config = small_config(default_source)
        report = run_stream(config)
        pooled = sample_gaussian(
            default_model, config.total_samples, SeededStream(config.seed)
        )
        assert report.data_hash == hashlib.sha256(pooled.tobytes()).hexdigest()
        m, n = config.nodes, config.batch_size
        cells = [
            pooled[(t * m + l) * n : (t * m + l + 1) * n]
            for t in range(config.horizon)
            for l in range(m)
        ]
        rebuilt = np.vstack(cells)
        assert hashlib.sha256(rebuilt.tobytes()).hexdigest() == report.data_hash

    def test_statistical_equivalence_band(self, default_source):
        # median over 20 seeds: streaming error within [0.5x, 2x] of pooled
        errs_stream, errs_full = [], []
        for seed in range(20):
            config = small_config(
                default_source,
                nodes=4,
                batch_size=100,
                horizon=5,
                rank=5,
                surplus=0,
                seed=3000 + seed,
                algorithms=("odpca", "full"),
            )
            report = run_stream(config)
            errs_stream.append(report.final_error["odpca"])
            errs_full.append(report.final_error["full"])
        ratio = float(np.median(errs_stream)) / float(np.median(errs_full))
        assert 0.5 <= ratio <= 2.0

    def test_matrix_source_without_truth(self, rng):
        data = rng.standard_normal((60, 8))
        config = small_config(
            MatrixSource(data=data), nodes=2, batch_size=5, horizon=3, ambient_dim=8,
            surplus=0,
        )
        report = run_stream(config)
        assert math.isnan(report.final_error["odpca"])
        assert all(math.isnan(e) for e in report.per_round_error)

    def test_matrix_source_insufficient_rows(self, rng):
        data = rng.standard_normal((10, 8))
        config = small_config(
            MatrixSource(data=data), nodes=2, batch_size=5, horizon=3, ambient_dim=8,
            surplus=0,
        )
        with pytest.raises(IngestionError, match="rows"):
            run_stream(config)

    def test_rejects_bad_algorithms(self, default_source):
        config = small_config(default_source, algorithms=("odpca", "magic"))
        with pytest.raises(ValueError, match="unknown algorithms"):
            run_stream(config)

    def test_rejects_projection_rank_overflow(self, default_source):
        config = small_config(default_source, rank=49, surplus=2)
        with pytest.raises(ValueError, match="projection rank"):
            run_stream(config)


class TestScalingExperiment:
    def test_quadrupling_samples_halves_error(self, default_source):
        base = small_config(
            default_source, nodes=4, batch_size=100, horizon=5, rank=5, surplus=0,
            seed=0, algorithms=("odpca",),
        )
        rows = scaling_experiment(base, factors=[1, 4], replications=20)
        assert rows[0].total_samples * 4 == rows[1].total_samples
        ratio = rows[1].mean_error / rows[0].mean_error
        assert 0.4 <= ratio <= 0.7

    def test_replication_noise_band(self, default_source):
        base = small_config(
            default_source, nodes=4, batch_size=100, horizon=5, rank=5, surplus=0,
            seed=0, algorithms=("odpca",),
        )
        rows = scaling_experiment(base, factors=[1, 1], replications=20)
        ratio = rows[1].mean_error / rows[0].mean_error
        assert 0.8 <= ratio <= 1.25

    def test_errors_positive_finite(self, default_source):
        base = small_config(default_source, algorithms=("odpca",), surplus=0)
        rows = scaling_experiment(base, factors=[1, 2], replications=10)
        for row in rows:
            assert math.isfinite(row.mean_error) and row.mean_error > 0.0
            assert math.isfinite(row.std_error)

    def test_batch_size_scaling_axis(self, default_source):
        base = small_config(default_source, algorithms=("odpca",), surplus=0)
        rows = scaling_experiment(base, factors=[2], replications=10, scale="batch_size")
        assert rows[0].total_samples == base.total_samples * 2

    def test_too_few_replications(self, default_source):
        base = small_config(default_source, algorithms=("odpca",))
        with pytest.raises(ValueError, match="replications"):
            scaling_experiment(base, factors=[1], replications=5)


class TestTimingProbe:
    def test_rows_and_phase_accounting(self, default_source):
        config = small_config(default_source, batch_size=60)
        rows = timing_probe(config, repetitions=3)
        assert {r.algorithm for r in rows} == set(config.algorithms)
        for row in rows:
            assert row.local_s >= 0.0 and row.aggregate_s >= 0.0
            assert row.total_s > 0.0
            # phases account for at least 90% of the measured envelope
            assert row.local_s + row.aggregate_s >= 0.9 * row.total_s
            assert row.total_std_s >= 0.0

    def test_streaming_local_batches_are_per_round(self, default_source):
        config = small_config(default_source)
        rows = {r.algorithm: r for r in timing_probe(config, repetitions=3)}
        assert rows["odpca"].local_batch_rows == config.batch_size
        assert rows["dpca"].local_batch_rows == config.batch_size * config.horizon
