"""Binarized classification data held as column bitvectors.

Columns are stored column-major (one bitvector per feature) so that term
captures are bitwise ANDs over columns.  Datasets are immutable after load
and safe to share across search workers.

The sensitive attribute is deliberately kept outside ``features`` so it can
never be used as a rule term in a model that is later audited against it.
"""

from __future__ import annotations

import csv
import hashlib
import random
import warnings
from dataclasses import dataclass, field

from .bitvec import full_mask, popcount, subset_bits
from .errors import (
    DataError,
    DuplicateNameError,
    EmptyDatasetError,
    InvalidFractionError,
    LengthMismatchError,
    MissingColumnError,
    NonBinaryValueError,
)


@dataclass(frozen=True)
class BinaryDataset:
    n_examples: int
    n_features: int
    features: tuple[int, ...]          # one bitvector per feature column
    labels: int                        # bitvector, bit n = label of example n
    feature_names: tuple[str, ...]

    def __post_init__(self):
        # N = 0 is representable (split may produce an empty test side);
        # loaders reject it at the boundary instead.
        if self.n_examples < 0:
            raise EmptyDatasetError("negative example count")
        if len(self.features) != self.n_features or len(self.feature_names) != self.n_features:
            raise DataError("feature count inconsistent with columns/names")
        if len(set(self.feature_names)) != self.n_features or "" in self.feature_names:
            raise DuplicateNameError("feature names must be unique and nonempty")
        mask = full_mask(self.n_examples)
        for col in (*self.features, self.labels):
            if col & ~mask:
                raise DataError("bitvector longer than the dataset")

    @property
    def mask(self) -> int:
        return full_mask(self.n_examples)

    def fingerprint(self) -> str:
        """Stable content hash used by run manifests."""
        h = hashlib.sha256()
        h.update(f"{self.n_examples};{self.n_features};".encode())
        h.update(";".join(self.feature_names).encode())
        h.update(f";{self.labels:x}".encode())
        for col in self.features:
            h.update(f";{col:x}".encode())
        return h.hexdigest()


@dataclass(frozen=True)
class SensitiveVector:
    values: int                        # bitvector of length n_examples
    name: str
    n_examples: int = field(default=0)

    def __post_init__(self):
        if self.n_examples <= 0:
            raise DataError("sensitive vector needs a positive length")
        if self.values & ~full_mask(self.n_examples):
            raise LengthMismatchError("sensitive vector longer than the owning dataset")


def load_csv(path, label_column: str, sensitive_column: str | None = None):
    """Load a binarized CSV (header row, cells restricted to '0'/'1').

    Every non-label, non-sensitive column becomes a feature bitvector; row
    order is preserved.  Returns (BinaryDataset, SensitiveVector or None).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DuplicateNameError(f"{path}: duplicate column names in header")
        if label_column not in header:
            raise MissingColumnError(label_column)
        if sensitive_column is not None and sensitive_column not in header:
            raise MissingColumnError(sensitive_column)

        label_idx = header.index(label_column)
        sens_idx = header.index(sensitive_column) if sensitive_column is not None else None
        feat_idx = [i for i in range(len(header)) if i != label_idx and i != sens_idx]

        columns = [0] * len(feat_idx)
        labels = 0
        sens = 0
        n = 0
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            bit = 1 << n
            for j, i in enumerate(feat_idx):
                cell = row[i].strip()
                if cell == "1":
                    columns[j] |= bit
                elif cell != "0":
                    raise NonBinaryValueError(row_no, header[i], row[i])
            cell = row[label_idx].strip()
            if cell == "1":
                labels |= bit
            elif cell != "0":
                raise NonBinaryValueError(row_no, header[label_idx], row[label_idx])
            if sens_idx is not None:
                cell = row[sens_idx].strip()
                if cell == "1":
                    sens |= bit
                elif cell != "0":
                    raise NonBinaryValueError(row_no, header[sens_idx], row[sens_idx])
            n += 1

    if n == 0:
        raise EmptyDatasetError(f"{path}: no data rows")

    dataset = BinaryDataset(
        n_examples=n,
        n_features=len(feat_idx),
        features=tuple(columns),
        labels=labels,
        feature_names=tuple(header[i] for i in feat_idx),
    )
    sensitive = None
    if sens_idx is not None:
        sensitive = SensitiveVector(values=sens, name=header[sens_idx], n_examples=n)
    return dataset, sensitive


def write_csv(dataset: BinaryDataset, path, label_column: str = "y",
              sensitive: SensitiveVector | None = None) -> None:
    """Inverse of load_csv; round-trips bit-identically."""
    header = list(dataset.feature_names) + [label_column]
    if sensitive is not None:
        header.append(sensitive.name)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for n in range(dataset.n_examples):
            row = [(col >> n) & 1 for col in dataset.features]
            row.append((dataset.labels >> n) & 1)
            if sensitive is not None:
                row.append((sensitive.values >> n) & 1)
            writer.writerow(row)


def positive_count(dataset: BinaryDataset) -> int:
    """Number of examples with label 1."""
    return popcount(dataset.labels)


def split(dataset: BinaryDataset, train_fraction: float, seed: int):
    """Deterministic seeded train/test partition.

    Train gets floor(train_fraction * N) examples; each side keeps the
    original relative row order.  A fraction of 1.0 is allowed and yields an
    empty test set (flagged with a warning).
    """
    if not 0.0 < train_fraction <= 1.0:
        raise InvalidFractionError(f"train_fraction must be in (0, 1], got {train_fraction}")
    n = dataset.n_examples
    n_train = int(train_fraction * n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    train_rows = sorted(order[:n_train])
    test_rows = sorted(order[n_train:])
    if not test_rows:
        warnings.warn("split produced an empty test set", stacklevel=2)
    return _take(dataset, train_rows), _take(dataset, test_rows)


def take_rows(dataset: BinaryDataset, rows) -> BinaryDataset:
    """Project the dataset onto the given example rows (ascending order)."""
    return _take(dataset, list(rows))


def _take(dataset: BinaryDataset, rows: list[int]):
    return BinaryDataset(
        n_examples=len(rows),
        n_features=dataset.n_features,
        features=tuple(subset_bits(col, rows) for col in dataset.features),
        labels=subset_bits(dataset.labels, rows),
        feature_names=dataset.feature_names,
    )
