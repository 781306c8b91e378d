"""Tabular dataset loading, normalization, and neighbour precomputation.

Columns are min-max scaled to [0, 1] (constant columns become all zeros)
and each point's ordering of every other point by ascending input-space
distance is computed once up front; the embedding-quality objective only
ever reads these orderings.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric dataset; arrays are marked read-only at construction."""

    instances: np.ndarray  # (n, m) float64, normalized
    labels: np.ndarray | None  # (n,) int class codes, or None
    label_names: tuple[str, ...] | None
    feature_names: tuple[str, ...]
    neighbour_order: np.ndarray  # (n, k) int, k = min(n - 1, max_neighbours)

    @property
    def n_instances(self) -> int:
        return self.instances.shape[0]

    @property
    def n_features(self) -> int:
        return self.instances.shape[1]


def normalize(matrix: np.ndarray) -> np.ndarray:
    """Min-max scale each column to [0, 1]; constant columns map to zeros."""
    X = np.asarray(matrix, dtype=np.float64)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    out = np.zeros_like(X)
    varying = span > 0
    out[:, varying] = (X[:, varying] - lo[varying]) / span[varying]
    return out


def neighbour_order(instances: np.ndarray, max_neighbours: int | None = None) -> np.ndarray:
    """Row i lists every j != i by ascending Euclidean distance from i.

    Equal distances are ordered by ascending index.  Ordering is computed on
    squared distances, which sorts identically and avoids rounding collisions
    from the square root.
    """
    X = np.asarray(instances, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise DatasetError(f"need at least 2 instances, got {n}")
    if not np.isfinite(X).all():
        raise DatasetError("instances contain NaN or infinite values")
    diff = X[:, None, :] - X[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    order = np.argsort(d2, axis=1, kind="stable")
    # drop the self column wherever the stable sort placed it
    rows = order[order != np.arange(n)[:, None]].reshape(n, n - 1)
    if max_neighbours is not None and max_neighbours < n - 1:
        rows = rows[:, :max_neighbours]
    return np.ascontiguousarray(rows)


def from_arrays(
    instances,
    labels=None,
    feature_names=None,
    max_neighbours: int | None = None,
) -> Dataset:
    """Build a Dataset from in-memory arrays (normalizes and orders neighbours)."""
    X = np.asarray(instances, dtype=np.float64)
    if X.ndim != 2:
        raise DatasetError(f"instance matrix must be 2-D, got shape {X.shape}")
    n, m = X.shape
    if n < 2:
        raise DatasetError(f"need at least 2 instances, got {n}")
    if m < 2:
        raise DatasetError(f"need at least 2 features, got {m}")
    if not np.isfinite(X).all():
        raise DatasetError("instances contain NaN or infinite values")

    label_codes = None
    label_names = None
    if labels is not None:
        raw = [str(v) for v in labels]
        if len(raw) != n:
            raise DatasetError(f"got {len(raw)} labels for {n} instances")
        names = sorted(set(raw))
        code_of = {name: i for i, name in enumerate(names)}
        label_codes = np.asarray([code_of[v] for v in raw], dtype=np.intp)
        label_names = tuple(names)

    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(m))
    else:
        feature_names = tuple(feature_names)
        if len(feature_names) != m:
            raise DatasetError(f"got {len(feature_names)} feature names for {m} columns")

    norm = normalize(X)
    order = neighbour_order(norm, max_neighbours=max_neighbours)
    for arr in (norm, order) + ((label_codes,) if label_codes is not None else ()):
        arr.setflags(write=False)
    return Dataset(
        instances=norm,
        labels=label_codes,
        label_names=label_names,
        feature_names=feature_names,
        neighbour_order=order,
    )


def load_csv(
    path,
    label_column: str | None = None,
    max_neighbours: int | None = None,
) -> Dataset:
    """Load a headered CSV of real numbers, with an optional label column."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise DatasetError(f"{path}: duplicate column names {dupes}")
        if label_column is not None:
            if label_column not in header:
                raise DatasetError(f"{path}: no column named {label_column!r}")
            label_idx = header.index(label_column)
        else:
            label_idx = None

        rows: list[list[float]] = []
        labels: list[str] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for col_idx, cell in enumerate(row):
                if col_idx == label_idx:
                    labels.append(cell.strip())
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {row_no}, column {header[col_idx]!r}: "
                        f"cannot parse {cell.strip()!r} as a number"
                    ) from None
                if not np.isfinite(value):
                    raise DatasetError(
                        f"{path}: row {row_no}, column {header[col_idx]!r}: "
                        f"non-finite value {cell.strip()!r}"
                    )
                values.append(value)
            rows.append(values)

    if len(rows) < 2:
        raise DatasetError(f"{path}: need at least 2 instances, got {len(rows)}")
    feature_names = [h for i, h in enumerate(header) if i != label_idx]
    if len(feature_names) < 2:
        raise DatasetError(f"{path}: need at least 2 feature columns, got {len(feature_names)}")
    return from_arrays(
        np.asarray(rows, dtype=np.float64),
        labels=labels if label_idx is not None else None,
        feature_names=feature_names,
        max_neighbours=max_neighbours,
    )
