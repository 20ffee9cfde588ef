"""Closed-form rates and bandwidths for anisotropic smoothness with product structure.

Smoothness ``beta``, integrability ``p`` (``math.inf`` allowed) and Lipschitz
radii ``L`` are per coordinate.  When ``beta`` and ``p`` are given as ``int`` or
``Fraction`` the exponents are exact rationals, which matters for the
``r == r_max`` boundary of the adaptive rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .partitions import Block, Partition

BOUNDARY_TOL = 1e-12
DYADIC_TOL = 1e-12


def _inv(x):
    if x == math.inf:
        return 0
    if isinstance(x, Rational):
        return Fraction(1) / Fraction(x)
    return 1.0 / x


def _check(beta, p):
    if any(b <= 0 for b in beta):
        raise ValueError("beta must be positive")
    if any(v < 1 for v in p):
        raise ValueError("p must be >= 1")


def kappa(beta: Sequence, p: Sequence, I: Block):
    return 1 - sum(_inv(beta[k]) * _inv(p[k]) for k in I)


def kappa_i(beta: Sequence, p: Sequence, I: Block, i: int):
    return 1 - sum((_inv(p[k]) - _inv(p[i])) * _inv(beta[k]) for k in I)


def effective_smoothness(beta: Sequence, p: Sequence, I: Block) -> dict[int, object]:
    """``beta_i(I) = kappa(I) beta_i / kappa_i(I)`` for each ``i`` in ``I``."""
    k = kappa(beta, p, I)
    return {i: k * beta[i] / kappa_i(beta, p, I, i) for i in I}


def gamma_block(beta: Sequence, p: Sequence, I: Block):
    if len(I) == 0:
        raise ValueError("block must be nonempty")
    _check(beta, p)
    return kappa(beta, p, I) / sum(_inv(beta[i]) for i in I)


def rate_r(beta: Sequence, p: Sequence, P: Partition):
    return min(gamma_block(beta, p, I) for I in P.blocks)


def _expo(r) -> float:
    den = 2.0 * float(r) + 1.0
    return math.nan if den == 0 else float(r) / den


def minimax_rate(beta, p, P: Partition, n: float) -> float:
    """``(1/n)^{r/(2r+1)}``."""
    return (1.0 / n) ** _expo(rate_r(beta, p, P))


def rho(beta, p, P: Partition, n: float) -> float:
    r = rate_r(beta, p, P)
    return 1.0 if r <= 0 else minimax_rate(beta, p, P, n)


def r_max(beta_max, d_bar: int):
    if isinstance(beta_max, Rational):
        return Fraction(beta_max) / d_bar
    return beta_max / d_bar


def _is_boundary(r, rmax) -> bool:
    if isinstance(r, Rational) and isinstance(rmax, Rational):
        return r == rmax
    return abs(float(r) - float(rmax)) <= BOUNDARY_TOL * max(1.0, abs(float(rmax)))


def adaptive_rate(beta, p, P: Partition, n: float, beta_max, d_bar: int) -> float:
    """``(ln n / n)^{r/(2r+1)}`` below ``r_max``; ``n^{-r_max/(2 r_max + 1)}`` at it."""
    if n < 3:
        raise ValueError("n must be >= 3")
    r = rate_r(beta, p, P)
    rmax = r_max(beta_max, d_bar)
    if _is_boundary(r, rmax):
        return (1.0 / n) ** _expo(rmax)
    if r > rmax:
        raise ValueError(f"r = {float(r)} exceeds r_max = {float(rmax)}: outside the adaptive scale")
    return (math.log(n) / n) ** _expo(r)


def minimax_bandwidth(beta, p, P: Partition, n: float) -> tuple[float, ...]:
    """Bandwidth balancing bias and standard deviation block by block."""
    if rate_r(beta, p, P) <= 0:
        raise ValueError("r <= 0: no consistent estimator exists on this class")
    h = [0.0] * len(beta)
    for I in P.blocks:
        g = gamma_block(beta, p, I)
        bi = effective_smoothness(beta, p, I)
        for i in I:
            h[i] = n ** (-_expo(g) / float(bi[i]))
    return tuple(h)


def adaptive_bandwidth(beta, p, L, P: Partition, n: float) -> tuple[float, ...]:
    """Solution of ``L_i h_i^{beta_i(I)} = sqrt(ln(n) / (n V_{h_I}))`` on every block (before projection)."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if rate_r(beta, p, P) <= 0:
        raise ValueError("r <= 0: no consistent estimator exists on this class")
    h = [0.0] * len(beta)
    for I in P.blocks:
        g = gamma_block(beta, p, I)
        bi = effective_smoothness(beta, p, I)
        LI = math.prod(float(L[i]) ** (1.0 / float(bi[i])) for i in I)
        for i in I:
            b = float(bi[i])
            h[i] = float(L[i]) ** (-1.0 / b) * (LI * math.log(n) / n) ** (_expo(g) / b)
    return tuple(h)


def dyadic_floor(value: float) -> float:
    """Largest ``2^{-k}``, ``k >= 0``, not exceeding ``value`` (``value`` in (0, 1])."""
    if not 0.0 < value:
        raise ValueError("value must be positive")
    # values within DYADIC_TOL of a power of two (e.g. 1024**-0.2) count as that power
    value = value * (1.0 + DYADIC_TOL)
    if value >= 1.0:
        return 1.0
    k = math.ceil(-math.log2(value))
    # guard against log2 rounding at exact powers of two
    while 2.0 ** -(k - 1) <= value:
        k -= 1
    while 2.0 ** -k > value:
        k += 1
    return 2.0 ** -k


def adaptive_anchor(I: Block, n: float, beta_max: float, d_bar: int) -> tuple[float, ...]:
    """Dyadic projection of ``n^{-1/(2 beta_max + d_bar)}`` for every coordinate of ``I``."""
    if n < 3:
        raise ValueError("n must be >= 3")
    raw = n ** (-1.0 / (2.0 * float(beta_max) + d_bar))
    return tuple(dyadic_floor(raw) for _ in I)


def project_dyadic(h: Sequence[float]) -> tuple[float, ...]:
    return tuple(dyadic_floor(min(v, 1.0)) for v in h)


@dataclass
class RateReport:
    gammas: dict[str, float]
    r: float
    regime: str
    phi_n: float | None
    rho_n: float
    psi_n: float | None
    r_max: float | None
    n: float
    minimax_bandwidth: tuple[float, ...] | None = None
    notes: list[str] = field(default_factory=list)


def rate_report(beta, p, P: Partition, n: float, beta_max=None, d_bar: int | None = None) -> RateReport:
    gammas = {",".join(str(i + 1) for i in I): float(gamma_block(beta, p, I)) for I in P.blocks}
    r = rate_r(beta, p, P)
    rmax = None if beta_max is None else r_max(beta_max, d_bar if d_bar is not None else P.max_block_size)
    psi = None
    notes = []
    if r <= 0:
        regime = "inconsistent"
    elif rmax is None:
        regime = "minimax"
    elif _is_boundary(r, rmax):
        regime = "adaptive-boundary"
    elif r < rmax:
        regime = "adaptive-interior"
    else:
        regime = "minimax"
        notes.append("r exceeds r_max: outside the adaptive scale, psi_n undefined")
    if regime.startswith("adaptive"):
        psi = adaptive_rate(beta, p, P, n, beta_max, d_bar if d_bar is not None else P.max_block_size)
    bw = minimax_bandwidth(beta, p, P, n) if r > 0 else None
    return RateReport(gammas=gammas, r=float(r), regime=regime,
                      phi_n=minimax_rate(beta, p, P, n) if r > 0 else None,
                      rho_n=rho(beta, p, P, n), psi_n=psi, r_max=None if rmax is None else float(rmax),
                      n=n, minimax_bandwidth=bw, notes=notes)
