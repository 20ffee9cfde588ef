"""Numerical bias functional and its decay check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..kernels import HigherOrderKernel
from ..partitions import Partition
from ..quadrature import gauss_nodes
from ..rates import effective_smoothness
from .models import DensityModel

GAUSS_POINTS = 24


def bias_functional(model: DensityModel, kernel: HigherOrderKernel, I: Sequence[int], h: Sequence[float],
                    eta: Sequence[float], x0: Sequence[float], npts: int = GAUSS_POINTS) -> float:
    """``int K_I(u) [f_I(x0 + (h v eta) u) - f_I(x0 + eta u)] du`` by tensor Gauss-Legendre quadrature.

    ``h``, ``eta`` and ``x0`` are full d-vectors; only the coordinates of ``I`` are used.
    """
    I = tuple(I)
    nodes, weights = gauss_nodes(kernel.breakpoints, npts)
    kw = weights * np.array([kernel(float(z)) for z in nodes])
    hI = np.array([max(h[i], eta[i]) for i in I])
    eI = np.array([float(eta[i]) for i in I])
    xI = np.array([float(x0[i]) for i in I])
    grids = np.meshgrid(*([nodes] * len(I)), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.ones(len(u))
    wgrids = np.meshgrid(*([kw] * len(I)), indexing="ij")
    for g in wgrids:
        w = w * g.ravel()
    diff = model.marginal_pdf(I, xI + hI * u) - model.marginal_pdf(I, xI + eI * u)
    return math.fsum(w * diff)


@dataclass
class BiasReport:
    block: tuple[int, ...]
    h_values: list[float]
    bias: list[float]
    exponent: float
    required: float
    zero_at_equal: bool

    @property
    def passed(self) -> bool:
        return self.exponent >= self.required and self.zero_at_equal


def bias_bound_check(model: DensityModel, kernel: HigherOrderKernel, beta: Sequence[float], P: Partition,
                     h_values: Sequence[float] | None = None, x0: Sequence[float] | None = None,
                     slack: float = 0.15) -> list[BiasReport]:
    """Fit ``ln|B| ~ e ln h`` with ``eta = 0`` on every block and compare ``e`` to ``min beta_i(I) - slack``.

    Isotropic ``h`` is used on each block; ``p`` is taken as infinity.
    """
    d = model.d
    if h_values is None:
        h_values = [2.0 ** -k for k in range(3, 9)]
    x0 = (0.0,) * d if x0 is None else tuple(x0)
    p = (math.inf,) * d
    zero = (0.0,) * d
    reports = []
    for I in P.blocks:
        bs = []
        for hv in h_values:
            h = tuple(hv if i in I else 1.0 for i in range(d))
            bs.append(bias_functional(model, kernel, I, h, zero, x0))
        eq = [bias_functional(model, kernel, I, (hv,) * d, (hv,) * d, x0) for hv in h_values]
        slope = float(np.polyfit(np.log(h_values), np.log(np.abs(bs)), 1)[0])
        need = min(float(b) for b in effective_smoothness(beta, p, I).values()) - slack
        reports.append(BiasReport(block=I, h_values=list(h_values), bias=bs, exponent=slope, required=need,
                                  zero_at_equal=all(v == 0.0 for v in eq)))
    return reports
