"""
Dataset containers shared by every stage of the pipeline.

A Dataset is an ordered, immutable collection of scalar (x, y) pairs with
a provenance label: the original table Z0, the training split Z1, the
validation split Z2, or the dithered copy of the training split.
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from utils.errors import DataError

LABELS = ("original", "train", "validate", "dithered")


class SamplePair(NamedTuple):
    x: float
    y: float


def _frozen_array(values, name):
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"{name} value at row {bad + 1} is not finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered (x, y) samples with a provenance label.

    ``indices`` records which rows of the source dataset each sample came
    from when the dataset was produced by a split; it is None otherwise.
    """

    x: np.ndarray
    y: np.ndarray
    label: str = "original"
    name: str = ""
    indices: Optional[Tuple[int, ...]] = field(default=None)

    def __post_init__(self):
        if self.label not in LABELS:
            raise DataError(f"unknown dataset label {self.label!r}; expected one of {LABELS}")
        x = _frozen_array(self.x, "x")
        y = _frozen_array(self.y, "y")
        if x.size == 0:
            raise DataError("dataset is empty")
        if x.size != y.size:
            raise DataError(f"x has {x.size} values but y has {y.size}")
        if self.indices is not None and len(self.indices) != x.size:
            raise DataError("indices length does not match the dataset size")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @classmethod
    def from_pairs(cls, pairs, label="original", name=""):
        pairs = list(pairs)
        if not pairs:
            raise DataError("dataset is empty")
        xs, ys = zip(*pairs)
        return cls(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), label=label, name=name)

    @property
    def size(self):
        return int(self.x.size)

    def __len__(self):
        return self.size

    @property
    def samples(self):
        return [SamplePair(float(a), float(b)) for a, b in zip(self.x, self.y)]

    def subset(self, indices, label):
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.x[idx], self.y[idx], label=label, name=self.name, indices=tuple(idx.tolist()))

    def with_values(self, x=None, y=None, label=None):
        return Dataset(
            self.x if x is None else x,
            self.y if y is None else y,
            label=self.label if label is None else label,
            name=self.name,
            indices=self.indices,
        )

    def equals(self, other):
        """Exact equality of values and label."""
        return (
            self.label == other.label
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )

    def __repr__(self):
        return f"Dataset(name={self.name!r}, label={self.label!r}, size={self.size})"
