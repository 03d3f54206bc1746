"""Datasets: Gaussian samples, a synthetic anomaly benchmark, CSV I/O and splits."""

from __future__ import annotations

import csv
import enum
import errno
import os
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import make_rng


class SplitMode(str, enum.Enum):
    NORMAL_ONLY_TRAIN = "normal-only"
    RANDOM = "random"


class CsvFormatError(ValueError):
    pass


@dataclass(frozen=True)
class MinMaxStats:
    """Per-feature range used to map features onto [-1, 1]."""

    low: np.ndarray
    high: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "MinMaxStats":
        if x.shape[0] == 0:
            raise ValueError("cannot fit normalization on an empty dataset")
        return cls(x.min(axis=0), x.max(axis=0))

    def _span(self) -> np.ndarray:
        span = self.high - self.low
        return np.where(span > 0, span, 1.0)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (x - self.low) / self._span() - 1.0

    def invert(self, x: np.ndarray) -> np.ndarray:
        return (x + 1.0) / 2.0 * self._span() + self.low

    def to_dict(self) -> dict:
        return {"low": self.low.tolist(), "high": self.high.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxStats":
        return cls(np.asarray(d["low"], dtype=np.float64), np.asarray(d["high"], dtype=np.float64))


@dataclass(frozen=True)
class TabularDataset:
    features: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)
    stats: MinMaxStats | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {x.shape}")
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels).astype(int).reshape(-1)
            if y.size != x.shape[0]:
                raise ValueError(f"{y.size} labels for {x.shape[0]} rows")
            if not np.all((y == 0) | (y == 1)):
                raise ValueError("labels must be 0 or 1")
            object.__setattr__(self, "labels", y)
        if not self.feature_names:
            object.__setattr__(self, "feature_names", [f"x{i}" for i in range(x.shape[1])])
        elif len(self.feature_names) != x.shape[1]:
            raise ValueError("feature_names length does not match the number of columns")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def anomaly_fraction(self) -> float | None:
        if self.labels is None:
            return None
        return float(self.labels.mean()) if self.labels.size else 0.0

    def subset(self, idx) -> "TabularDataset":
        idx = np.asarray(idx, dtype=int)
        labels = None if self.labels is None else self.labels[idx]
        return replace(self, features=self.features[idx], labels=labels)

    def normalized(self, stats: MinMaxStats) -> "TabularDataset":
        return replace(self, features=stats.apply(self.features), stats=stats)


def sample_gaussian(mu: float, sigma: float, n: int, seed: int) -> TabularDataset:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if n < 0:
        raise ValueError("n must be non-negative")
    x = make_rng(seed, "gaussian").normal(mu, sigma, size=(n, 1))
    return TabularDataset(x, feature_names=["x"])


def synth_anomaly_benchmark(n_normal: int, n_anomaly: int, d: int,
                            separation: float, seed: int) -> TabularDataset:
    """Normals from N(0, I), anomalies from N(separation * 1, I), shuffled."""
    if n_normal < 0 or n_anomaly < 0:
        raise ValueError("counts must be non-negative")
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = make_rng(seed, "synth")
    normal = rng.normal(0.0, 1.0, size=(n_normal, d))
    anomal = rng.normal(separation, 1.0, size=(n_anomaly, d))
    x = np.vstack([normal, anomal])
    y = np.r_[np.zeros(n_normal, dtype=int), np.ones(n_anomaly, dtype=int)]
    perm = rng.permutation(x.shape[0])
    return TabularDataset(x[perm], y[perm])


def load_tabular_csv(path, label_column: str | None = None) -> TabularDataset:
    """Read a headed, comma-separated numeric table.

    Rows are numbered from 1 after the header in error messages.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, header row required") from None
        if label_column is not None and label_column not in header:
            raise CsvFormatError(f"{path}: unknown label column {label_column!r}")
        label_idx = header.index(label_column) if label_column is not None else None
        feat_idx = [i for i in range(len(header)) if i != label_idx]
        rows, labels = [], []
        for r, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if len(cells) != len(header):
                raise CsvFormatError(f"{path}: row {r} has {len(cells)} cells, header has {len(header)}")
            vals = []
            for i in feat_idx:
                try:
                    vals.append(float(cells[i]))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: non-numeric cell {cells[i]!r} at row {r} (line {r + 1}), column {header[i]!r}"
                    ) from None
            if not np.all(np.isfinite(vals)):
                raise CsvFormatError(f"{path}: non-finite value at row {r}")
            rows.append(vals)
            if label_idx is not None:
                cell = cells[label_idx].strip()
                if cell not in ("0", "1"):
                    raise CsvFormatError(
                        f"{path}: label {cell!r} at row {r} (line {r + 1}) is not 0 or 1"
                    )
                labels.append(int(cell))
    x = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feat_idx))
    y = np.asarray(labels, dtype=int) if label_idx is not None else None
    return TabularDataset(x, y, [header[i] for i in feat_idx])


def write_tabular_csv(ds: TabularDataset, path, label_column: str = "label") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(ds.feature_names)
        if ds.labels is not None:
            header.append(label_column)
        w.writerow(header)
        for i, row in enumerate(ds.features):
            cells = [repr(float(v)) for v in row]
            if ds.labels is not None:
                cells.append(str(int(ds.labels[i])))
            w.writerow(cells)


def split_train_test(ds: TabularDataset, train_fraction: float = 0.8,
                     mode=SplitMode.NORMAL_ONLY_TRAIN, seed: int = 0):
    """Split rows into (train, test).

    NORMAL_ONLY_TRAIN: a ``train_fraction`` share of the label-0 rows forms
    the training set; every anomaly and the remaining normals go to test.
    RANDOM: a uniform split of all rows.
    """
    mode = mode if isinstance(mode, SplitMode) else SplitMode(mode)
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    rng = make_rng(seed, "split", mode.value)
    if mode is SplitMode.NORMAL_ONLY_TRAIN:
        if ds.labels is None:
            raise ValueError("NORMAL_ONLY_TRAIN needs labels")
        normals = np.flatnonzero(ds.labels == 0)
        normals = normals[rng.permutation(normals.size)]
        n_train = int(round(train_fraction * normals.size))
        train_idx = np.sort(normals[:n_train])
        test_idx = np.setdiff1d(np.arange(len(ds)), train_idx)
    else:
        perm = rng.permutation(len(ds))
        n_train = int(round(train_fraction * len(ds)))
        train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    return ds.subset(train_idx), ds.subset(test_idx)


def normalize_split(train: TabularDataset, test: TabularDataset):
    """Fit min-max stats on ``train`` and apply them unchanged to both."""
    stats = MinMaxStats.fit(train.features)
    return train.normalized(stats), test.normalized(stats)
