"""Dataset container shared by all four learning algorithms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, EmptyInput


@dataclass
class Dataset:
    """Standardized ping vectors with binary labels (strong=1, weak=0)."""

    x: np.ndarray  # (n, cells) float64
    y: np.ndarray  # (n,) in {0, 1}
    ids: np.ndarray  # original ping indices, (n,)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.ids is None:
            self.ids = np.arange(len(self.y))
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.x.ndim != 2:
            raise DimensionMismatch(f"x must be 2-D, got {self.x.shape}")
        if not (len(self.x) == len(self.y) == len(self.ids)):
            raise DimensionMismatch("x, y, ids lengths differ")
        if self.y.size and not np.isin(self.y, (0, 1)).all():
            raise DimensionMismatch("labels must be 0/1")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_cells(self) -> int:
        return self.x.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.x[idx], self.y[idx], self.ids[idx])

    def require_nonempty(self):
        if len(self) == 0:
            raise EmptyInput("empty dataset")
        return self
