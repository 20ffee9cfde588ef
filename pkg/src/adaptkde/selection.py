"""Pointwise selection of a bandwidth and an independence structure.

Every admitted candidate ``(h, P)`` is compared with every other one through
the auxiliary estimator at bandwidth ``h v eta`` over the blocks of ``P o P'``.
The candidate minimising ``Delta_hat + 2 Lambda_n U_hat`` is returned.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .constants import a_from_lambda, build_table
from .estimators import (MarginalCache, SampleMatrix, auxiliary_estimate, g_tilde,
                         product_estimate, vmax, volume)
from .kernels import HigherOrderKernel
from .partitions import Block, Partition, compose

# relative slack on the band and box comparisons; v_m = 2^{-m tau} is rarely exact
REL_TOL = 1e-9

Candidate = tuple[tuple[float, ...], Partition]


class EmptyCandidateSetError(ValueError):
    """No ``(h, P)`` survives the grid constraints."""

    def __init__(self, message: str, diagnostics: list[dict] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


@dataclass(frozen=True)
class GridConfig:
    """Parameters of the admissible bandwidth sets.

    ``anchors`` is a per-coordinate vector; ``block_anchors`` may override it
    for individual blocks.  ``tau[s-1]`` is ``tau(s)``.
    """

    anchors: tuple[float, ...]
    tau: tuple[float, ...]
    z: float
    a: float
    n: int
    block_anchors: Mapping[Block, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tau) != len(self.anchors):
            raise ValueError("tau must have one entry per block size 1..d")
        if not all(0.0 < t <= 1.0 for t in self.tau):
            raise ValueError(f"tau(s) must lie in (0, 1], got {self.tau}")
        if not all(0.0 < v <= 1.0 for v in self.anchors):
            raise ValueError(f"anchors must lie in (0, 1], got {self.anchors}")
        if self.z <= 0 or self.a <= 0:
            raise ValueError("z and a must be positive")
        if self.n < 3:
            raise ValueError("n must be >= 3")

    @property
    def d(self) -> int:
        return len(self.anchors)

    def anchor(self, I: Block) -> dict[int, float]:
        if I in self.block_anchors:
            return dict(zip(I, self.block_anchors[I]))
        return {i: self.anchors[i] for i in I}

    def anchor_volume(self, I: Block) -> float:
        return math.prod(self.anchor(I).values())

    def v(self, m: int, s: int) -> float:
        return 2.0 ** (-m * self.tau[s - 1])

    @property
    def tau_floor(self) -> float:
        return min(self.tau)


def v_max(pbar: Sequence[Partition], grid: GridConfig) -> float:
    return max(min(grid.anchor_volume(I) for I in P.blocks) for P in pbar)


def grid_levels(I: Block, grid: GridConfig, V_max: float) -> int:
    """``M_n(I)``: the largest ``M <= log2(n)`` with ``v_M [V_anchor ^ V_max] >= ln(n)/(a n)``."""
    base = min(grid.anchor_volume(I), V_max)
    rhs = math.log(grid.n) / (grid.a * grid.n)
    cap = math.floor(math.log2(grid.n))
    M = 0
    while M < cap and grid.v(M + 1, len(I)) * base >= rhs:
        M += 1
    if M < 1:
        lhs = grid.v(1, len(I)) * base
        raise EmptyCandidateSetError(
            f"empty candidate set for block {_fmt_block(I)}: "
            f"v_1*min(V_anchor, V_max) = {lhs:.6g} < ln(n)/(a*n) = {rhs:.6g} (n={grid.n}, a={grid.a:.6g})",
            [{"block": _fmt_block(I), "constraint": "v_1*min(V_anchor,V_max) >= ln(n)/(a*n)",
              "lhs": lhs, "rhs": rhs, "n": grid.n, "a": grid.a}])
    return M


def _fmt_block(I: Block) -> str:
    return "{" + ",".join(str(i + 1) for i in I) + "}"


def _le(x: float, y: float) -> bool:
    return x <= y * (1.0 + REL_TOL)


def grid_membership(h: Sequence[float], I: Block, grid: GridConfig, V_max: float) -> bool:
    """Whether ``h_I`` lies in the admissible set of block ``I``."""
    M = grid_levels(I, grid, V_max)
    anc = grid.anchor(I)
    VhI = volume(h, I)
    Va = grid.anchor_volume(I)
    s = len(I)
    lo_box = 1.0 / grid.n
    if not all(_le(lo_box, h[i]) and h[i] <= 1.0 for i in I):
        return False
    for m in range(1, M + 1):
        vm, vm1 = grid.v(m, s), grid.v(m - 1, s)
        if not all(_le(h[i], vm ** (-grid.z) * anc[i]) for i in I):
            continue
        if (_le(vm * Va, VhI) and _le(VhI, vm1 * Va)) or (_le(vm * V_max, VhI) and _le(VhI, vm1 * V_max)):
            return True
    return False


@dataclass
class CandidateSet:
    """The admitted pairs ``(h, P)`` from ``Hbar x Pbar``, in canonical order."""

    hbar: tuple[tuple[float, ...], ...]
    pbar: tuple[Partition, ...]
    grid: GridConfig
    admitted: list[Candidate]
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def V_max(self) -> float:
        return v_max(self.pbar, self.grid)

    @property
    def d(self) -> int:
        return self.grid.d

    def __len__(self) -> int:
        return len(self.admitted)

    def __contains__(self, cand) -> bool:
        h, P = cand
        return (tuple(h), P) in set(self.admitted)


def build_candidates(hbar: Sequence[Sequence[float]], pbar: Sequence[Partition], grid: GridConfig,
                     allow_empty: bool = False) -> CandidateSet:
    """Intersect ``Hbar x Pbar`` with the grid-admissible set.

    Duplicates are removed and candidates sorted, so the result does not depend
    on the input order.
    """
    hs = sorted({tuple(float(v) for v in h) for h in hbar})
    ps = sorted(set(pbar))
    if not hs or not ps:
        raise EmptyCandidateSetError("Hbar and Pbar must be nonempty")
    for h in hs:
        if len(h) != grid.d:
            raise ValueError(f"bandwidth {h} does not have d={grid.d} entries")
    for P in ps:
        if P.d != grid.d:
            raise ValueError(f"partition {P} does not have d={grid.d}")
    Vmax = v_max(ps, grid)
    diagnostics: list[dict] = []
    member: dict[tuple[Block, tuple[float, ...]], bool] = {}
    dead_blocks: set[Block] = set()
    for P in ps:
        for I in P.blocks:
            if I in dead_blocks:
                continue
            try:
                grid_levels(I, grid, Vmax)
            except EmptyCandidateSetError as err:
                dead_blocks.add(I)
                diagnostics.extend(err.diagnostics)
    admitted: list[Candidate] = []
    for h in hs:
        for P in ps:
            ok = True
            for I in P.blocks:
                if I in dead_blocks:
                    ok = False
                    break
                key = (I, tuple(h[i] for i in I))
                if key not in member:
                    member[key] = grid_membership(h, I, grid, Vmax)
                if not member[key]:
                    ok = False
                    break
            if ok:
                admitted.append((h, P))
    cs = CandidateSet(hbar=tuple(hs), pbar=tuple(ps), grid=grid, admitted=admitted, diagnostics=diagnostics)
    if not admitted and not allow_empty:
        if diagnostics:
            msg = "; ".join(f"block {dg['block']}: {dg['constraint']} fails ({dg['lhs']:.6g} < {dg['rhs']:.6g})"
                            for dg in diagnostics)
        else:
            msg = "no bandwidth in Hbar satisfies the band/box constraints of its blocks"
        raise EmptyCandidateSetError(f"empty candidate set: {msg}", diagnostics)
    return cs


def delta_factor(h: Sequence[float], P: Partition, candidates: CandidateSet) -> float:
    """Ratio of (combined) anchor volumes to bandwidth volumes over all ``P o P'``."""
    grid = candidates.grid
    best = candidates.V_max / min(grid.anchor_volume(I) for I in P.blocks)
    for Pp in candidates.pbar:
        for I in P.blocks:
            aI = grid.anchor(I)
            for Ip in Pp.blocks:
                J = tuple(sorted(set(I).intersection(Ip)))
                if not J:
                    continue
                aIp = grid.anchor(Ip)
                num = math.prod(max(aI[j], aIp[j]) for j in J)
                best = max(best, num / volume(h, J))
    return best


def partition_volume(h: Sequence[float], P: Partition) -> float:
    """``V(h, P)``: the smallest block volume."""
    return min(volume(h, I) for I in P.blocks)


def u_hat(h: Sequence[float], P: Partition, g_bar_val: float, candidates: CandidateSet) -> float:
    n = candidates.grid.n
    lg = max(1.0, math.log(delta_factor(h, P, candidates)))
    return math.sqrt(g_bar_val**2 * lg / (n * partition_volume(h, P)))


def lambda_n(g_bar_val: float, lam: float, d: int) -> float:
    return 3.0 * lam * d**2 * (2.0 * g_bar_val) ** (d**2 - 1)


def g_bar(kernel: HigherOrderKernel, data: SampleMatrix, candidates: CandidateSet, x0: Sequence[float],
          cache: MarginalCache | None = None) -> float:
    """Twice the largest empirical envelope over candidate pairs and blocks of ``P o P'``."""
    C = candidates.admitted
    if not C:
        raise EmptyCandidateSetError("empty candidate set")
    best = 1.0
    for i, (h, P) in enumerate(C):
        for eta, Pp in C[i:]:
            hv = vmax(h, eta)
            for J in compose(P, Pp).blocks:
                g = cache.get(J, hv)[1] if cache is not None else g_tilde(kernel, data, J, hv, x0)
                best = max(best, g)
    return 2.0 * best


def delta_hat(h: Sequence[float], P: Partition, kernel: HigherOrderKernel, data: SampleMatrix,
              x0: Sequence[float], candidates: CandidateSet, lam: float,
              g_bar_val: float | None = None) -> float:
    """Direct (uncached) evaluation of the comparison statistic for one candidate."""
    if g_bar_val is None:
        g_bar_val = g_bar(kernel, data, candidates, x0)
    Lam = lambda_n(g_bar_val, lam, candidates.d)
    u_h = u_hat(h, P, g_bar_val, candidates)
    best = 0.0
    for eta, Pp in candidates.admitted:
        diff = abs(auxiliary_estimate(kernel, data, h, P, eta, Pp, x0) - product_estimate(kernel, data, eta, Pp, x0))
        best = max(best, diff - Lam * (u_hat(eta, Pp, g_bar_val, candidates) + u_h))
    return best


@dataclass
class SelectionResult:
    h: tuple[float, ...]
    partition: Partition
    estimate: float
    g_bar: float
    lambda_n: float
    criterion: float
    delta_hat: float
    u_hat: float
    n_candidates: int
    trace: list[dict]
    cache_hits: int = 0
    cache_entries: int = 0
    elapsed_s: float = field(default=0.0, compare=False)

    def to_dict(self, with_trace: bool = True) -> dict:
        out = {
            "h": list(self.h),
            "partition": str(self.partition),
            "estimate": self.estimate,
            "g_bar": self.g_bar,
            "lambda_n": self.lambda_n,
            "criterion": self.criterion,
            "delta_hat": self.delta_hat,
            "u_hat": self.u_hat,
            "n_candidates": self.n_candidates,
        }
        if with_trace:
            out["trace"] = self.trace
        return out


def select(data: SampleMatrix, x0: Sequence[float], candidates: CandidateSet, kernel: HigherOrderKernel,
           lam: float, cached: bool = True) -> SelectionResult:
    """Run the selection rule at ``x0``.

    Ties in the criterion go to the larger ``V(h, P)``, then the
    lexicographically smaller ``h``, then the canonical partition order.
    """
    t0 = time.perf_counter()
    C = candidates.admitted
    if not C:
        raise EmptyCandidateSetError("empty candidate set", candidates.diagnostics)
    if data.d != candidates.d:
        raise ValueError(f"data dimension {data.d} != candidate dimension {candidates.d}")
    if data.n != candidates.grid.n:
        raise ValueError(f"candidate grid was built for n={candidates.grid.n}, data has n={data.n}")
    x0 = np.asarray(x0, dtype=float)
    N = len(C)
    d = candidates.d
    cache = MarginalCache(kernel, data, x0) if cached else None

    if cached:
        comps: dict[tuple[Partition, Partition], tuple[Block, ...]] = {}
        aux = np.empty((N, N))
        gmax = 1.0
        for i, (h, P) in enumerate(C):
            for j in range(i, N):
                eta, Pp = C[j]
                key = (P, Pp)
                blocks = comps.get(key)
                if blocks is None:
                    blocks = comps.setdefault(key, compose(P, Pp).blocks)
                hv = vmax(h, eta)
                val = 1.0
                for J in blocks:
                    est, g = cache.get(J, hv)
                    val *= est
                    if g > gmax:
                        gmax = g
                aux[i, j] = aux[j, i] = val
        Gbar = 2.0 * gmax
        prod = np.array([aux[i, i] for i in range(N)])
    else:
        Gbar = g_bar(kernel, data, candidates, x0)
        aux = np.array([[auxiliary_estimate(kernel, data, h, P, eta, Pp, x0) for eta, Pp in C] for h, P in C])
        prod = np.array([product_estimate(kernel, data, h, P, x0) for h, P in C])

    Lam = lambda_n(Gbar, lam, d)
    deltas = np.array([delta_factor(h, P, candidates) for h, P in C])
    vols = np.array([partition_volume(h, P) for h, P in C])
    U = Gbar * np.sqrt(np.maximum(1.0, np.log(deltas)) / (data.n * vols))
    D = np.abs(aux - prod[None, :]) - Lam * (U[:, None] + U[None, :])
    dhat = np.maximum(0.0, D.max(axis=1))
    crit = dhat + 2.0 * Lam * U

    best = min(range(N), key=lambda k: (crit[k], -vols[k], C[k][0], C[k][1]))
    trace = [
        {"h": list(h), "partition": str(P), "V": float(vols[k]), "delta": float(deltas[k]),
         "u_hat": float(U[k]), "delta_hat": float(dhat[k]), "criterion": float(crit[k]),
         "estimate": float(prod[k])}
        for k, (h, P) in enumerate(C)
    ]
    h_sel, P_sel = C[best]
    return SelectionResult(
        h=h_sel, partition=P_sel, estimate=float(prod[best]), g_bar=float(Gbar), lambda_n=float(Lam),
        criterion=float(crit[best]), delta_hat=float(dhat[best]), u_hat=float(U[best]), n_candidates=N,
        trace=trace, cache_hits=cache.hits if cache else 0, cache_entries=len(cache) if cache else 0,
        elapsed_s=time.perf_counter() - t0)


@dataclass(frozen=True)
class Thresholds:
    mode: str
    lam: float
    a: float


def thresholds(mode: str, q: float, d: int, kernel: HigherOrderKernel, lambda_scale: float = 1.0,
               z: float = 1.0, tau_floor: float = 1.0) -> Thresholds:
    """``(lambda, a)`` for the rule: from the constants table, or from a user scale."""
    if mode == "theory":
        tab = build_table(q, d, kernel, z, tau_floor)
        return Thresholds(mode, tab.lambda_, tab.a)
    if mode == "practical":
        if lambda_scale <= 0:
            raise ValueError("lambda_scale must be positive")
        return Thresholds(mode, float(lambda_scale), a_from_lambda(lambda_scale, q))
    raise ValueError(f"unknown mode {mode!r} (expected 'theory' or 'practical')")
