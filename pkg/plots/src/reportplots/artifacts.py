"""CSV artifact loading with schema validation.

Input files are never modified; loaders read and parse only. Expected
schemas are the ones the benchmark driver emits:

    train_log.csv  episode,cum_reward,mean_erank,mean_penalty
    sweep.csv      param,value,mean_erank,std_erank,n_seeds[,std_slots]
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAIN_COLUMNS = ("episode", "cum_reward", "mean_erank", "mean_penalty")
SWEEP_COLUMNS = ("param", "value", "mean_erank", "std_erank", "n_seeds")


class SchemaError(ValueError):
    """CSV content does not match the expected artifact schema."""


@dataclass(frozen=True)
class RunArtifact:
    """A CSV artifact plus presentation attributes."""

    path: Path
    label: str
    color_index: int = 0

    @classmethod
    def from_path(cls, path, label: str | None = None, color_index: int = 0):
        p = Path(path)
        return cls(path=p, label=label or p.stem, color_index=color_index)


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def read_train_log(path) -> dict[str, np.ndarray]:
    """Columns of a training log as float arrays, keyed by column name."""
    header, body = _read_rows(path)
    for col in TRAIN_COLUMNS:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    if not body:
        raise SchemaError(f"{path}: no data rows")
    idx = {col: header.index(col) for col in TRAIN_COLUMNS}
    return {col: np.array([float(r[i]) for r in body]) for col, i in idx.items()}


@dataclass(frozen=True)
class SweepTable:
    param: str
    values: tuple[float, ...]
    mean: dict[float, float]
    std: dict[float, float]


def read_sweep(path) -> SweepTable:
    """One algorithm's sweep results keyed by grid value."""
    header, body = _read_rows(path)
    for col in SWEEP_COLUMNS:
        if col not in header:
            raise SchemaError(f"{path}: missing column {col!r}")
    if not body:
        raise SchemaError(f"{path}: no data rows")
    idx = {col: header.index(col) for col in SWEEP_COLUMNS}
    params = {r[idx["param"]] for r in body}
    if len(params) != 1:
        raise SchemaError(f"{path}: expected a single sweep parameter, found {sorted(params)}")
    values, mean, std = [], {}, {}
    for r in body:
        v = float(r[idx["value"]])
        values.append(v)
        mean[v] = float(r[idx["mean_erank"]])
        std[v] = float(r[idx["std_erank"]])
    return SweepTable(param=params.pop(), values=tuple(values), mean=mean, std=std)
