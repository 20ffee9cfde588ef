"""Theoretical threshold constants of the selection rule.

These are the explicit constants behind the empirical-process bounds.  They
are enormous (``lambda`` above 1e9 already for d=2), which is why the selection
module defaults to a user-calibrated "practical" threshold.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .kernels import HigherOrderKernel

DELTA_SUP_UPPER = 10.0
SUP_GRID_POINTS = 20_000


def delta_star(lo: float = 1e-8, hi: float = 1.0, rel_width: float = 1e-14) -> float:
    """Root of ``8 pi^2 delta (1 + ln(delta)^2) = 1`` by bisection.

    The left side is nondecreasing (derivative ``8 pi^2 (1 + ln delta)^2``), so
    the root is unique.
    """

    def g(x: float) -> float:
        return 8.0 * math.pi**2 * x * (1.0 + math.log(x) ** 2) - 1.0

    if g(lo) > 0 or g(hi) < 0:
        raise ValueError("bisection bracket does not contain the root")
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def s_star(delta):
    return (6.0 / math.pi**2) / (1.0 + np.log(delta) ** 2)


def _sup_over_delta(fn, dstar: float) -> tuple[float, float]:
    # log grid scan, then bounded local refinement around the best grid cell
    grid = np.geomspace(dstar, DELTA_SUP_UPPER, SUP_GRID_POINTS)
    vals = fn(grid)
    k = int(np.argmax(vals))
    best_x, best_v = float(grid[k]), float(vals[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -float(fn(np.array([t]))[0]), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-6 * lo})
        if -res.fun > best_v:
            best_x, best_v = float(res.x), float(-res.fun)
    return best_v, best_x


def _cs_terms(s: int, dstar: float):
    c = 9216.0 * (s + 1)

    def first(x):
        return np.maximum(0.0, 1.0 + np.log(c * x**2 / s_star(x) ** 2)) / x**2

    def second(x):
        return np.maximum(0.0, 1.0 + np.log(c * x / s_star(x))) / x**2

    return first, second


def c_s(s: int, dstar: float | None = None) -> float:
    """The constant ``C_s``: two suprema over ``delta > delta_*``.

    Both integrands are dominated by ``1/delta^2`` so the search is truncated
    at ``delta = 10``; the grid value is a lower estimate of the supremum.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    dstar = delta_star() if dstar is None else dstar
    first, second = _cs_terms(s, dstar)
    return s * _sup_over_delta(first, dstar)[0] + s * _sup_over_delta(second, dstar)[0]


def c_s1(s: int, q: float, dstar: float | None = None, cs: float | None = None) -> float:
    dstar = delta_star() if dstar is None else dstar
    cs = c_s(s, dstar) if cs is None else cs
    return max(144.0 * s / dstar**2 + 5.0 * q + 3.0 + 36.0 * cs, 1.0)


def lambda_s_q(s: int, q: float, kernel: HigherOrderKernel, dstar: float | None = None,
               cs: float | None = None) -> float:
    """Kernel-dependent constant ``lambda_s^(q)[K]``."""
    if s < 1 or q < 1:
        raise ValueError("need s >= 1 and q >= 1")
    ks = kernel.sup_norm**s
    lead = max(10.0 * s * math.e**s + 10.0 * s * math.e * kernel.lipschitz / kernel.sup_norm, 48.0 * math.e)
    return lead * (math.sqrt(7.0) + 7.0 * math.sqrt((1.0 + q) * ks)) * c_s1(s, q, dstar, cs) * ks


def lambda_s_q_z(s: int, q: float, kernel: HigherOrderKernel, z: float, tau_floor: float,
                 dstar: float | None = None, cs: float | None = None) -> float:
    """``lambda_s^(q)[K, z]``, inflated for the grid parameters ``z`` and ``tau``."""
    if not 0.0 < tau_floor <= 1.0:
        raise ValueError(f"tau floor must lie in (0, 1], got {tau_floor}")
    if z <= 0:
        raise ValueError("z must be positive")
    infl = math.sqrt(3.0 * q + s * q * max(1.0, z) * (1.0 + 1.0 / tau_floor))
    return infl * lambda_s_q(s, q, kernel, dstar, cs)


def a_from_lambda(lam: float, q: float) -> float:
    return (2.0 * lam * math.sqrt(1.0 + 2.0 * q)) ** -2


@dataclass(frozen=True)
class ConstantsTable:
    q: float
    d: int
    z: float
    tau_floor: float
    delta_star: float
    c_s: tuple[float, ...]
    c_s1: tuple[float, ...]
    lambda_s: tuple[float, ...]
    lambda_: float
    a: float
    kernel_l: int
    kernel_sup: float
    kernel_l1: float
    kernel_lipschitz: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lambda_")
        return out


def build_table(q: float, d: int, kernel: HigherOrderKernel, z: float = 1.0,
                tau_floor: float = 1.0) -> ConstantsTable:
    """Constants at risk order ``2q`` for ``s = 1..d``; ``lambda`` and ``a`` as used in the grid."""
    if d < 1:
        raise ValueError("d must be >= 1")
    dstar = delta_star()
    q2 = 2 * q
    cs = [c_s(s, dstar) for s in range(1, d + 1)]
    cs1 = [c_s1(s, q2, dstar, cs[s - 1]) for s in range(1, d + 1)]
    lam_s = [lambda_s_q_z(s, q2, kernel, z, tau_floor, dstar, cs[s - 1]) for s in range(1, d + 1)]
    lam = max(max(1.0, v) for v in lam_s)
    return ConstantsTable(q=q, d=d, z=z, tau_floor=tau_floor, delta_star=dstar, c_s=tuple(cs),
                          c_s1=tuple(cs1), lambda_s=tuple(lam_s), lambda_=lam, a=a_from_lambda(lam, q),
                          kernel_l=kernel.l, kernel_sup=kernel.sup_norm, kernel_l1=kernel.l1_norm,
                          kernel_lipschitz=kernel.lipschitz)
