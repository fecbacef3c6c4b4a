"""Dataset loading, validation, canonical file formats and train/test splits.

Canonical formats:
  * points (binary): magic ``CPTS``, u32-le m, u32-le n, then m*n float32-le
    values in row-major order;
  * points (csv): one row per example, plain decimal values;
  * labels csv: header ``id,label``;
  * soft-labels csv: header ``id,p0,...,p{k-1}``.

Splits use numpy's PCG64 generator seeded directly with the given 64-bit
seed, so the same seed reproduces the same partition on any platform.
"""

import csv
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError, FormatError

_MAGIC = b"CPTS"
SOFT_ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class PointSet:
    coords: np.ndarray  # (m, n) float32, finite

    def __post_init__(self):
        c = self.coords
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise FormatError(f"point array must be 2-D and nonempty, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise FormatError("point array contains non-finite values")

    @property
    def m(self):
        return self.coords.shape[0]

    @property
    def n(self):
        return self.coords.shape[1]


@dataclass(frozen=True)
class LabelSet:
    labels: np.ndarray  # (m,) int64 in [0, k)
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise FormatError("number of classes must be >= 1")
        if self.labels.ndim != 1:
            raise FormatError("labels must be a 1-D array")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.k):
            bad = int(np.argmax((self.labels < 0) | (self.labels >= self.k)))
            raise FormatError(f"label out of range [0,{self.k}) at row {bad}")


@dataclass(frozen=True)
class SoftLabelSet:
    dist: np.ndarray  # (m, k) float64, rows on the probability simplex

    def __post_init__(self):
        d = self.dist
        if d.ndim != 2:
            raise FormatError("soft labels must be a 2-D array")
        if np.any(d < 0) or np.any(d > 1):
            bad = int(np.argmax(np.any((d < 0) | (d > 1), axis=1)))
            raise FormatError(f"soft-label entry outside [0,1] at row {bad}")
        sums = d.sum(axis=1)
        off = np.abs(sums - 1.0) > SOFT_ROW_SUM_TOL
        if np.any(off):
            bad = int(np.argmax(off))
            raise FormatError(f"soft-label row {bad} sums to {sums[bad]:.8f}, not 1 within {SOFT_ROW_SUM_TOL}")

    @property
    def k(self):
        return self.dist.shape[1]


@dataclass(frozen=True)
class Dataset:
    points: PointSet
    labels: LabelSet
    soft: Optional[SoftLabelSet]
    ids: tuple  # stable, unique example identifiers (strings)

    def __post_init__(self):
        m = self.points.m
        if len(self.labels.labels) != m:
            raise FormatError(f"label count {len(self.labels.labels)} != point count {m}")
        if self.soft is not None and self.soft.dist.shape[0] != m:
            raise FormatError(f"soft-label count {self.soft.dist.shape[0]} != point count {m}")
        if len(self.ids) != m:
            raise FormatError(f"id count {len(self.ids)} != point count {m}")
        if len(set(self.ids)) != m:
            raise FormatError("example ids are not unique")

    @property
    def m(self):
        return self.points.m

    def subset(self, indices: np.ndarray) -> "Dataset":
        soft = None
        if self.soft is not None:
            soft = SoftLabelSet(self.soft.dist[indices])
        return Dataset(
            points=PointSet(self.points.coords[indices]),
            labels=LabelSet(self.labels.labels[indices], self.labels.k),
            soft=soft,
            ids=tuple(self.ids[i] for i in indices),
        )


def make_dataset(coords, labels, soft=None, k=None, ids=None) -> Dataset:
    """Build a validated Dataset from plain arrays."""
    coords = np.asarray(coords, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.int64)
    if soft is not None:
        soft = np.asarray(soft, dtype=np.float64)
    if k is None:
        k = soft.shape[1] if soft is not None else int(labels.max()) + 1
    if ids is None:
        ids = tuple(str(i) for i in range(coords.shape[0]))
    soft_set = SoftLabelSet(soft) if soft is not None else None
    return Dataset(PointSet(coords), LabelSet(labels, k), soft_set, tuple(ids))


# ---------------------------------------------------------------------------
# points i/o
# ---------------------------------------------------------------------------

def load_points(path, format="binary") -> PointSet:
    if format == "binary":
        return _load_points_binary(path)
    if format == "csv":
        return _load_points_csv(path)
    raise ConfigError(f"unknown point format {format!r}")


def _load_points_binary(path) -> PointSet:
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) < 12 or header[:4] != _MAGIC:
            raise FormatError(f"{path}: not a CPTS point file")
        m, n = struct.unpack("<II", header[4:12])
        if m < 1 or n < 1:
            raise FormatError(f"{path}: invalid shape ({m}, {n})")
        data = np.fromfile(f, dtype="<f4")
    if data.size != m * n:
        raise FormatError(f"{path}: expected {m * n} values, found {data.size}")
    return PointSet(data.reshape(m, n))


def write_points(path, points: PointSet):
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<II", points.m, points.n))
        np.ascontiguousarray(points.coords, dtype="<f4").tofile(f)


def _load_points_csv(path) -> PointSet:
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as f:
        for i, row in enumerate(csv.reader(f)):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(f"{path}: row {i} has {len(row)} values, expected {width}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as e:
                raise FormatError(f"{path}: row {i}: {e}") from None
    if not rows:
        raise FormatError(f"{path}: empty point file")
    arr = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = int(np.argmax(~np.isfinite(arr).all(axis=1)))
        raise FormatError(f"{path}: non-finite value at row {bad}")
    return PointSet(arr.astype(np.float32))


# ---------------------------------------------------------------------------
# labels / soft labels i/o
# ---------------------------------------------------------------------------

def load_labels(path, k=None):
    """Load a labels CSV, returning (LabelSet, ids)."""
    ids, labels = [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "label"]:
            raise FormatError(f"{path}: expected header 'id,label'")
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{path}: row {i} has {len(row)} fields, expected 2")
            try:
                lab = int(row[1])
            except ValueError:
                raise FormatError(f"{path}: row {i}: non-integer label {row[1]!r}") from None
            ids.append(row[0])
            labels.append(lab)
    labels = np.asarray(labels, dtype=np.int64)
    if k is None:
        k = int(labels.max()) + 1 if len(labels) else 1
    return LabelSet(labels, k), tuple(ids)


def write_labels(path, labels: LabelSet, ids: Sequence[str]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "label"])
        for i, lab in zip(ids, labels.labels):
            w.writerow([i, int(lab)])


def load_soft_labels(path):
    """Load a soft-labels CSV, returning (SoftLabelSet, ids).

    Rows whose sum is within 1e-6 of 1 are renormalized to sum exactly 1;
    anything further off is rejected.
    """
    ids, rows = [], []
    k = None
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or header[0].strip() != "id":
            raise FormatError(f"{path}: expected header 'id,p0,...'")
        k = len(header) - 1
        expected = ["p%d" % j for j in range(k)]
        if [h.strip() for h in header[1:]] != expected:
            raise FormatError(f"{path}: probability columns must be p0..p{k - 1}")
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != k + 1:
                raise FormatError(f"{path}: row {i} has {len(row) - 1} probabilities, expected {k}")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as e:
                raise FormatError(f"{path}: row {i}: {e}") from None
            ids.append(row[0])
    arr = np.asarray(rows, dtype=np.float64)
    soft = SoftLabelSet(arr)  # validates range and row sums
    arr = arr / arr.sum(axis=1, keepdims=True)
    return SoftLabelSet(arr), tuple(ids)


def write_soft_labels(path, soft: SoftLabelSet, ids: Sequence[str]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id"] + ["p%d" % j for j in range(soft.k)])
        for i, row in zip(ids, soft.dist):
            w.writerow([i] + [repr(float(v)) for v in row])


def load_dataset(points_path, labels_path, soft_path=None, point_format="binary") -> Dataset:
    points = load_points(points_path, point_format)
    labels, ids = load_labels(labels_path)
    if not ids:
        raise FormatError(f"{labels_path}: no label rows")
    soft = None
    if soft_path is not None:
        soft, soft_ids = load_soft_labels(soft_path)
        if soft_ids != ids:
            raise FormatError("soft-label ids do not match label ids")
    return Dataset(points, labels, soft, ids)


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

def split(d: Dataset, fraction: float, seed: int):
    """Deterministic pseudo-random partition into (first, second) parts.

    The first part receives floor(fraction * m) examples. The permutation
    comes from numpy's PCG64 stream seeded with `seed`, so identical seeds
    give identical partitions across runs and platforms.
    """
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must lie in (0,1), got {fraction}")
    m = d.m
    n_first = int(np.floor(fraction * m))
    if n_first < 1:
        raise DomainError(f"fraction {fraction} leaves an empty first part for m={m}")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(m)
    first = np.sort(perm[:n_first])
    second = np.sort(perm[n_first:])
    return d.subset(first), d.subset(second)
