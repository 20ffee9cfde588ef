"""Small quadrature helpers for compactly supported, piecewise-smooth integrands."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                     max_depth: int = 60) -> float:
    """Adaptive Simpson rule with absolute tolerance ``tol``."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        diff = left + right - whole
        if depth <= 0 or abs(diff) <= 15.0 * tol:
            return left + right + diff / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def piecewise_simpson(f: Callable[[float], float], breakpoints: Sequence[float], tol: float = 1e-12) -> float:
    """Adaptive Simpson on each interval between consecutive breakpoints."""
    pts = sorted(set(breakpoints))
    tol_piece = tol / max(len(pts) - 1, 1)
    return math.fsum(adaptive_simpson(f, lo, hi, tol_piece) for lo, hi in zip(pts[:-1], pts[1:]))


@lru_cache(maxsize=32)
def _leggauss(npts: int):
    return np.polynomial.legendre.leggauss(npts)


def gauss_nodes(breakpoints: Sequence[float], npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights, ``npts`` per piece."""
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    x, w = _leggauss(npts)
    lo, hi = pts[:-1, None], pts[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def piecewise_gauss(f: Callable[[np.ndarray], np.ndarray], breakpoints: Sequence[float], npts: int) -> float:
    """Composite Gauss-Legendre; exact for piecewise polynomials of degree < 2*npts."""
    nodes, weights = gauss_nodes(breakpoints, npts)
    return math.fsum(weights * f(nodes))
