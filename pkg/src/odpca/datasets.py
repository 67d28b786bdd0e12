"""Dataset ingestion (dense CSV and sparse libsvm), centering, and the
(node, round) batch grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .errors import IngestionError

DEFAULT_MEMORY_CAP_BYTES = 8 * 1024**3

_FORMATS = ("csv", "libsvm")
_CENTER_MODES = ("none", "global", "per_batch")


@dataclass(frozen=True)
class DatasetSpec:
    """How to load one file-backed dataset.

    ``center="global"`` subtracts the column means at load time;
    ``center="per_batch"`` defers centering to the batch grid (each
    (node, round) cell is centered on its own mean -- see center_grid_cells).
    ``limit_rows`` caps ingestion in file order; the optional shuffle permutes
    the retained rows. For libsvm, ``dimension`` fixes the densified width
    (default: the largest feature index seen).
    """

    path: str
    format: str = "csv"
    center: str = "none"
    limit_rows: int | None = None
    shuffle_seed: int | None = None
    header: bool = False
    dimension: int | None = None
    memory_cap_bytes: int = DEFAULT_MEMORY_CAP_BYTES


def load_dataset(spec: DatasetSpec) -> np.ndarray:
    """Materialize the dataset as a dense N x d float64 matrix."""
    if spec.format not in _FORMATS:
        raise ValueError(f"unrecognized format {spec.format!r}; expected one of {_FORMATS}")
    if spec.center not in _CENTER_MODES:
        raise ValueError(f"unrecognized center mode {spec.center!r}; expected one of {_CENTER_MODES}")
    if spec.limit_rows is not None and spec.limit_rows < 1:
        raise ValueError(f"limit_rows must be >= 1, got {spec.limit_rows}")
    if spec.format == "csv":
        x = _parse_csv(spec)
    else:
        x = _parse_libsvm(spec)
    if spec.shuffle_seed is not None:
        perm = Generator(Philox(key=spec.shuffle_seed % (1 << 128))).permutation(x.shape[0])
        x = x[perm]
    if spec.center == "global":
        x = x - x.mean(axis=0)
    return x


def _check_memory(rows: int, cols: int, cap: int, path: str):
    estimate = rows * cols * 8
    if estimate > cap:
        raise IngestionError(
            f"{path}: dense size estimate {estimate} bytes exceeds the "
            f"{cap}-byte memory cap; raise memory_cap_bytes to opt in"
        )


def _parse_csv(spec: DatasetSpec) -> np.ndarray:
    rows: list[list[float]] = []
    width: int | None = None
    with open(spec.path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and spec.header:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise IngestionError(f"{spec.path}:{lineno}: non-numeric field") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise IngestionError(
                    f"{spec.path}:{lineno}: expected {width} columns, got {len(values)}"
                )
            _check_memory(len(rows) + 1, width, spec.memory_cap_bytes, spec.path)
            rows.append(values)
            if spec.limit_rows is not None and len(rows) >= spec.limit_rows:
                break
    if not rows:
        raise IngestionError(f"{spec.path}: no data rows")
    return np.asarray(rows, dtype=float)


def _parse_libsvm(spec: DatasetSpec) -> np.ndarray:
    entries: list[list[tuple[int, float]]] = []
    max_index = spec.dimension or 0
    with open(spec.path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            feats: list[tuple[int, float]] = []
            for tok in tokens[1:]:  # first token is the label, discarded
                if tok.startswith("#"):
                    break
                index_str, sep, value_str = tok.partition(":")
                if not sep:
                    raise IngestionError(f"{spec.path}:{lineno}: malformed feature {tok!r}")
                try:
                    index = int(index_str)
                    value = float(value_str)
                except ValueError:
                    raise IngestionError(f"{spec.path}:{lineno}: malformed feature {tok!r}") from None
                if index < 1:
                    raise IngestionError(f"{spec.path}:{lineno}: indices are 1-based, got {index}")
                if spec.dimension is not None and index > spec.dimension:
                    raise IngestionError(
                        f"{spec.path}:{lineno}: index {index} exceeds dimension {spec.dimension}"
                    )
                feats.append((index - 1, value))
                max_index = max(max_index, index)
            _check_memory(len(entries) + 1, max(max_index, 1), spec.memory_cap_bytes, spec.path)
            entries.append(feats)
            if spec.limit_rows is not None and len(entries) >= spec.limit_rows:
                break
    if not entries:
        raise IngestionError(f"{spec.path}: no data rows")
    if max_index == 0:
        raise IngestionError(f"{spec.path}: no feature indices found and no dimension given")
    out = np.zeros((len(entries), max_index))
    for i, feats in enumerate(entries):
        for j, v in feats:
            out[i, j] = v
    return out


def write_csv_matrix(path, x: np.ndarray):
    """Serialize with 17 significant digits so a reload is bit-exact."""
    x = np.asarray(x, dtype=float)
    with open(path, "w") as fh:
        for row in np.atleast_2d(x):
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def partition_stream(x: np.ndarray, m: int, n: int, horizon: int) -> list[list[np.ndarray]]:
    """Row-contiguous (node, round) grid over the first m*n*horizon rows.

    Cell (node l, round t), both 0-based, is the row slice starting at
    (t*m + l)*n; cells are disjoint and exhaustive. Returns grid[t][l] views
    into x (no copies).
    """
    if m < 1 or n < 1 or horizon < 1:
        raise ValueError("node count, batch size, and horizon must all be >= 1")
    need = m * n * horizon
    if x.shape[0] < need:
        raise IngestionError(f"stream needs {need} rows, dataset has {x.shape[0]}")
    return [
        [x[(t * m + l) * n : (t * m + l + 1) * n] for l in range(m)]
        for t in range(horizon)
    ]


def center_grid_cells(x: np.ndarray, m: int, n: int, horizon: int) -> np.ndarray:
    """Copy of the first m*n*horizon rows with each grid cell mean-centered.

    This realizes per-batch centering at the finest streaming granularity;
    every algorithm then consumes the same centered vectors, keeping the
    data-identity guarantee intact.
    """
    need = m * n * horizon
    if x.shape[0] < need:
        raise IngestionError(f"stream needs {need} rows, dataset has {x.shape[0]}")
    out = np.array(x[:need], dtype=float, copy=True)
    for start in range(0, need, n):
        cell = out[start : start + n]
        cell -= cell.mean(axis=0)
    return out
