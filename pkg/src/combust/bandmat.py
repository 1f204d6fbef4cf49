"""Small banded-matrix container in LAPACK band storage.

Layout matches scipy.linalg.solve_banded: entry (i, j) of the n x n matrix
lives at data[upper + i - j, j] for -lower <= j - i <= upper.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass
class BandedMatrix:
    data: np.ndarray   # shape (lower + upper + 1, n)
    lower: int
    upper: int

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def copy(self) -> "BandedMatrix":
        return BandedMatrix(self.data.copy(), self.lower, self.upper)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        y = np.zeros(n)
        for off in range(-self.lower, self.upper + 1):
            band = self.data[self.upper - off]
            if off >= 0:
                y[: n - off] += band[off:] * x[off:]
            else:
                y[-off:] += band[: n + off] * x[: n + off]
        return y

    def scale_rows(self, s: np.ndarray) -> None:
        """In-place M[i, :] *= s[i]."""
        n = self.n
        for off in range(-self.lower, self.upper + 1):
            if off >= 0:
                self.data[self.upper - off, off:] *= s[: n - off]
            else:
                self.data[self.upper - off, : n + off] *= s[-off:]

    def add_diagonal(self, vals: np.ndarray) -> None:
        """In-place M[i, i] += vals[i]."""
        self.data[self.upper, :] += vals

    def diagonal(self) -> np.ndarray:
        return self.data[self.upper, :]

    def to_dense(self) -> np.ndarray:
        n = self.n
        dense = np.zeros((n, n))
        for off in range(-self.lower, self.upper + 1):
            band = self.data[self.upper - off]
            if off >= 0:
                dense[np.arange(n - off), np.arange(off, n)] = band[off:]
            else:
                dense[np.arange(-off, n), np.arange(n + off)] = band[: n + off]
        return dense

    def solve(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.solve_banded((self.lower, self.upper), self.data, b)
