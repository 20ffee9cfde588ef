"""Synthetic product densities with exact evaluation and inverse-CDF sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..estimators import SampleMatrix

EX1_C = 64.0 / 15.0


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by ``(seed, *keys)``.

    Streams for different keys are statistically independent, so replication
    ``r`` at sample size ``n`` draws the same data whatever the scheduling.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


class Example1Marginal:
    """Piecewise-linear density on [0, 1], flat (= 16/15) on (1/4, 3/4]."""

    name = "example1"

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.select(
            [(t >= 0) & (t < 0.125), (t > 0.125) & (t <= 0.25), (t > 0.25) & (t <= 0.75), (t > 0.75) & (t <= 1.0)],
            [4.0 * t, 0.75 - 2.0 * t, np.full_like(t, 0.25), 1.0 - t],
            default=0.0,
        )
        # t = 1/8 falls in neither closed piece of the formula; take the continuous value
        vals = np.where(t == 0.125, 0.5, vals)
        return EX1_C * vals

    def cdf(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        w = np.select(
            [t < 0.125, t <= 0.25, t <= 0.75],
            [2.0 * t**2,
             1 / 32 + 0.75 * (t - 0.125) - (t**2 - 1 / 64),
             5 / 64 + (t - 0.25) / 4],
            default=13 / 64 + (t - 0.75) - (t**2 - 9 / 16) / 2,
        )
        return EX1_C * w

    def ppf(self, u):
        w = np.clip(np.asarray(u, dtype=float), 0.0, 1.0) / EX1_C
        with np.errstate(invalid="ignore"):
            t = np.select(
                [w < 1 / 32, w < 5 / 64, w < 13 / 64],
                [np.sqrt(w / 2.0),
                 (0.75 - np.sqrt(np.maximum(0.0, 0.5625 - 4.0 * (w + 3 / 64)))) / 2.0,
                 0.25 + 4.0 * (w - 5 / 64)],
                default=1.0 - np.sqrt(np.maximum(0.0, 0.46875 - 2.0 * w)),
            )
        return t

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))


@dataclass(frozen=True)
class GaussianMarginal:
    sigma: float = 1.0
    name: str = "gaussian"

    def pdf(self, t):
        t = np.asarray(t, dtype=float) / self.sigma
        return np.exp(-0.5 * t**2) / (math.sqrt(2.0 * math.pi) * self.sigma)

    def cdf(self, t):
        from scipy.special import ndtr
        return ndtr(np.asarray(t, dtype=float) / self.sigma)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sigma * rng.standard_normal(n)


@dataclass(frozen=True)
class DensityModel:
    """Product of independent one-dimensional marginals."""

    marginals: tuple
    kind: str = "product"

    @property
    def d(self) -> int:
        return len(self.marginals)

    def pdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError(f"point has dimension {x.shape[-1]}, model has d={self.d}")
        return float(np.prod([m.pdf(x[..., i]) for i, m in enumerate(self.marginals)]))

    def marginal_pdf(self, I: Sequence[int], xI) -> np.ndarray:
        """Density of ``X_I`` at points ``xI`` (shape ``(..., |I|)``)."""
        xI = np.asarray(xI, dtype=float)
        out = np.ones(xI.shape[:-1])
        for k, i in enumerate(I):
            out = out * self.marginals[i].pdf(xI[..., k])
        return out

    def sample(self, n: int, rng: np.random.Generator) -> SampleMatrix:
        cols = [m.sample(rng, n) for m in self.marginals]
        return SampleMatrix(np.column_stack(cols))


def example1(d: int) -> DensityModel:
    return DensityModel(tuple(Example1Marginal() for _ in range(d)), kind="example1")


def gaussian(sigma: float = 1.0, d: int = 1) -> DensityModel:
    return DensityModel(tuple(GaussianMarginal(sigma) for _ in range(d)), kind="gaussian")


def product_of(marginals: Sequence) -> DensityModel:
    return DensityModel(tuple(marginals), kind="product")


def density_eval(model: DensityModel, x) -> float:
    return model.pdf(x)


def sample(model: DensityModel, n: int, seed: int, *keys: int) -> SampleMatrix:
    return model.sample(n, make_rng(seed, *keys))


def model_from_name(name: str, d: int, sigma: float = 1.0) -> DensityModel:
    if name == "example1":
        return example1(d)
    if name == "gaussian":
        return gaussian(sigma, d)
    raise ValueError(f"unknown density {name!r} (expected 'example1' or 'gaussian')")
