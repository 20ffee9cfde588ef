"""Product-form kernel density estimators at a single point.

All sums run over the rows inside the kernel support, in row order, through
``math.fsum``; results are therefore correctly rounded and do not depend on
how the work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .kernels import HigherOrderKernel
from .partitions import Block, Partition, compose


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """``n`` observations in ``R^d``, one per row."""

    rows: np.ndarray

    def __post_init__(self):
        x = np.array(self.rows, dtype=float, copy=True)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("sample must be a nonempty (n, d) array")
        if not np.all(np.isfinite(x)):
            raise ValueError("sample contains non-finite entries")
        x.setflags(write=False)
        object.__setattr__(self, "rows", x)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def from_csv(cls, path: str | Path) -> "SampleMatrix":
        """Read a CSV with one header row and ``d`` numeric columns."""
        x = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(x)

    def concat(self, other: "SampleMatrix") -> "SampleMatrix":
        return SampleMatrix(np.vstack([self.rows, other.rows]))


def check_bandwidth(h: Sequence[float], d: int | None = None) -> tuple[float, ...]:
    h = tuple(float(v) for v in h)
    if d is not None and len(h) != d:
        raise ValueError(f"bandwidth has {len(h)} entries, expected {d}")
    if not all(0.0 < v <= 1.0 for v in h):
        raise ValueError(f"bandwidths must lie in (0, 1], got {h}")
    return h


def volume(h: Sequence[float], I: Block | None = None) -> float:
    """Block volume ``prod_{i in I} h_i`` (all coordinates if ``I`` is None)."""
    if I is None:
        return math.prod(h)
    return math.prod(h[i] for i in I)


def vmax(h: Sequence[float], eta: Sequence[float]) -> tuple[float, ...]:
    return tuple(max(a, b) for a, b in zip(h, eta))


def _kernel_terms(kernel: HigherOrderKernel, data: SampleMatrix, I: Block,
                  h: Sequence[float], x0: Sequence[float]) -> np.ndarray:
    """Per-row values ``prod_{i in I} K((X_i - x0_i)/h_i)`` for rows in the support."""
    cols = list(I)
    hI = np.array([h[i] for i in cols])
    u = (data.rows[:, cols] - np.asarray(x0, dtype=float)[cols]) / hI
    inside = np.all(np.abs(u) <= 0.5, axis=1)
    return np.prod(kernel(u[inside]), axis=1)


def marginal_estimate(kernel: HigherOrderKernel, data: SampleMatrix, I: Block,
                      h: Sequence[float], x0: Sequence[float]) -> float:
    """Kernel estimate of the marginal density of ``X_I`` at ``x0_I``.

    ``h`` and ``x0`` are full ``d``-vectors; only the coordinates in ``I`` are used.
    The value can be negative for kernels of order above 2.
    """
    if len(I) == 0:
        raise ValueError("block must be nonempty")
    terms = _kernel_terms(kernel, data, I, h, x0)
    return math.fsum(terms) / (data.n * volume(h, I))


def g_tilde(kernel: HigherOrderKernel, data: SampleMatrix, I: Block,
            h: Sequence[float], x0: Sequence[float]) -> float:
    """Empirical envelope ``1 v mean |K_h(X_I - x0_I)|``."""
    if len(I) == 0:
        raise ValueError("block must be nonempty")
    terms = _kernel_terms(kernel, data, I, h, x0)
    return max(1.0, math.fsum(np.abs(terms)) / (data.n * volume(h, I)))


def product_estimate(kernel: HigherOrderKernel, data: SampleMatrix, h: Sequence[float],
                     P: Partition, x0: Sequence[float]) -> float:
    """Product over the blocks of ``P`` of the marginal estimates."""
    if P.d != data.d:
        raise ValueError(f"partition dimension {P.d} != data dimension {data.d}")
    return math.prod(marginal_estimate(kernel, data, I, h, x0) for I in P.blocks)


def auxiliary_estimate(kernel: HigherOrderKernel, data: SampleMatrix, h: Sequence[float], P: Partition,
                       eta: Sequence[float], Q: Partition, x0: Sequence[float]) -> float:
    """Product over blocks of ``P o Q`` of marginal estimates at bandwidth ``h v eta``."""
    if P.d != data.d or Q.d != data.d:
        raise ValueError("partition dimension does not match the data")
    hv = vmax(h, eta)
    return math.prod(marginal_estimate(kernel, data, J, hv, x0) for J in compose(P, Q).blocks)


class MarginalCache:
    """Write-once store of ``(estimate, envelope)`` keyed by block and block bandwidth."""

    def __init__(self, kernel: HigherOrderKernel, data: SampleMatrix, x0: Sequence[float]):
        self.kernel = kernel
        self.data = data
        self.x0 = np.asarray(x0, dtype=float)
        self._store: dict[tuple[Block, tuple[float, ...]], tuple[float, float]] = {}
        self._diffs: dict[Block, np.ndarray] = {}
        self.hits = 0
        self.misses = 0

    def _compute(self, I: Block, hI: tuple[float, ...]) -> tuple[float, float]:
        diff = self._diffs.get(I)
        if diff is None:
            diff = self._diffs.setdefault(I, self.data.rows[:, list(I)] - self.x0[list(I)])
        u = diff / np.asarray(hI)
        inside = np.all(np.abs(u) <= 0.5, axis=1)
        terms = np.prod(self.kernel(u[inside]), axis=1)
        scale = self.data.n * math.prod(hI)
        return math.fsum(terms) / scale, max(1.0, math.fsum(np.abs(terms)) / scale)

    def get(self, I: Block, h: Sequence[float]) -> tuple[float, float]:
        key = (I, tuple(h[i] for i in I))
        val = self._store.get(key)
        if val is not None:
            self.hits += 1
            return val
        self.misses += 1
        return self._store.setdefault(key, self._compute(I, key[1]))

    def __len__(self) -> int:
        return len(self._store)
