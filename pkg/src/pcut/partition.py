from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Partition", "as_partition"]


@dataclass(frozen=True)
class Partition:
    """Hard assignment of n items to classes 0..c-1."""

    labels: np.ndarray
    c: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-D vector")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
        c = int(self.c)
        if c < 1:
            raise ValueError("class count must be at least 1")
        if labels.size and (labels.min() < 0 or labels.max() >= c):
            raise ValueError(f"labels must lie in 0..{c - 1}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_indicator(cls, E) -> "Partition":
        E = np.asarray(E)
        if np.any(E.sum(axis=1) != 1):
            raise ValueError("indicator rows must contain exactly one 1")
        return cls(np.argmax(E, axis=1), E.shape[1])

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def indicator(self) -> np.ndarray:
        E = np.zeros((self.n, self.c))
        E[np.arange(self.n), self.labels] = 1.0
        return E

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.c)

    def class_weights(self, pi) -> np.ndarray:
        """eta_j = sum of pi over class j."""
        return np.bincount(self.labels, weights=np.asarray(pi, float), minlength=self.c)

    def require_nonempty(self) -> None:
        empty = np.flatnonzero(self.sizes() == 0)
        if empty.size:
            raise ValueError(f"empty class {empty[0]}")

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.c == other.c and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.c, self.labels.tobytes()))


def as_partition(P, c: int | None = None) -> Partition:
    if isinstance(P, Partition):
        return P
    labels = np.asarray(P)
    if c is None:
        c = int(labels.max()) + 1 if labels.size else 1
    return Partition(labels, c)
