"""Higher-order kernels built from a compactly supported symmetric base.

The kernel of order ``l`` is the signed binomial combination

    u_l(z) = sum_{i=1..l} C(l, i) (-1)^(i+1) (1/i) u(z/i)

of dilations of a base ``u`` supported on ``[-1/(2l), 1/(2l)]``.  It integrates
to one, has vanishing moments of orders 1..l-1 and lives on ``[-1/2, 1/2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quadrature import piecewise_gauss, piecewise_simpson

SCAN_POINTS = 100_001


@dataclass(frozen=True)
class BaseKernel:
    """Symmetric, Lipschitz base function ``u`` with ``supp(u) in [-1/(2l), 1/(2l)]``."""

    l: int
    func: Callable[[np.ndarray], np.ndarray]
    support_halfwidth: float
    lipschitz_bound: float
    sup_bound: float
    breakpoints: tuple[float, ...] = ()
    piecewise_linear: bool = False

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=float))


def make_default_base(l: int) -> BaseKernel:
    """Triangular bump of half-width ``a = 1/(2l)``, normalised to unit mass."""
    if int(l) != l or l < 2:
        raise ValueError(f"kernel order l must be an integer >= 2, got {l}")
    l = int(l)
    a = 1.0 / (2 * l)

    def tri(z: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, 1.0 - np.abs(z) / a) / a

    return BaseKernel(l=l, func=tri, support_halfwidth=a, lipschitz_bound=1.0 / a**2,
                      sup_bound=1.0 / a, breakpoints=(-a, 0.0, a), piecewise_linear=True)


def _weights(l: int) -> list[float]:
    return [math.comb(l, i) * (-1) ** (i + 1) / i for i in range(1, l + 1)]


@dataclass(frozen=True)
class HigherOrderKernel:
    base: BaseKernel
    l: int
    sup_norm: float = field(init=False)
    l1_norm: float = field(init=False)
    lipschitz: float = field(init=False)
    breakpoints: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.base.l != self.l:
            raise ValueError("base kernel order does not match l")
        bps = {-0.5, 0.5}
        for i in range(1, self.l + 1):
            bps.update(i * b for b in self.base.breakpoints)
            bps.update((-i * self.base.support_halfwidth, i * self.base.support_halfwidth))
        object.__setattr__(self, "breakpoints", tuple(sorted(bps)))

        grid = np.union1d(np.linspace(-0.5, 0.5, SCAN_POINTS), self.breakpoints)
        vals = eval_ul(self, grid)
        slopes = np.abs(np.diff(vals) / np.diff(grid))
        w = np.abs(_weights(self.l))
        sup_an = float(np.sum(w) * self.base.sup_bound)
        lip_an = float(np.sum(w / np.arange(1, self.l + 1)) * self.base.lipschitz_bound)
        if self.base.piecewise_linear:
            # extrema and slopes are attained on the breakpoint grid: the scan is exact
            sup, lip = float(np.max(np.abs(vals))), float(np.max(slopes))
        else:
            sup = min(sup_an, 1.01 * float(np.max(np.abs(vals))))
            lip = min(lip_an, 1.01 * float(np.max(slopes)))
        object.__setattr__(self, "sup_norm", sup)
        object.__setattr__(self, "lipschitz", lip)

        # |K| has extra kinks at sign changes; add them as breakpoints
        sign_change = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
        roots = grid[sign_change] - vals[sign_change] * np.diff(grid)[sign_change] / np.diff(vals)[sign_change]
        l1 = piecewise_simpson(lambda z: abs(float(eval_ul(self, z))), list(self.breakpoints) + list(roots))
        object.__setattr__(self, "l1_norm", l1)

    def __call__(self, z):
        return eval_ul(self, z)

    def l2_norm_sq(self) -> float:
        return piecewise_gauss(lambda z: eval_ul(self, z) ** 2, self.breakpoints, 32)


def make_kernel(l: int = 2, base: BaseKernel | None = None) -> HigherOrderKernel:
    base = make_default_base(l) if base is None else base
    return HigherOrderKernel(base=base, l=l)


def eval_ul(kernel: HigherOrderKernel, z):
    """Evaluate the order-``l`` kernel; exactly zero outside ``[-1/2, 1/2]``."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for i, w in enumerate(_weights(kernel.l), start=1):
        out = out + w * kernel.base.func(z / i)
    return np.where(np.abs(z) > 0.5, 0.0, out)


def product_kernel_eval(kernel: HigherOrderKernel, h_I: Sequence[float], v: Sequence[float]) -> float:
    """``V_h^{-1} prod_i K(v_i / h_i)`` for one block."""
    h = np.asarray(h_I, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(h <= 0):
        raise ValueError("bandwidths must be positive")
    return float(np.prod(kernel(v / h)) / np.prod(h))


def moment(kernel: HigherOrderKernel, k: int, quadrature_points: int = 32) -> float:
    """``int z^k K(z) dz`` by composite Gauss-Legendre between kernel breakpoints."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if quadrature_points < 16:
        raise ValueError("quadrature_points must be >= 16")
    return piecewise_gauss(lambda z: z**k * eval_ul(kernel, z), kernel.breakpoints, quadrature_points)
