"""Key-value configuration files and assembly of the candidate set.

Format: one ``key = value`` per line, ``#`` starts a comment.  Keys::

    l            kernel order (default 2)
    q            risk order (default 1)
    beta_max     top of the smoothness scale, used by automatic anchors (default 1)
    d0_cap       cap on block size when pbar = all (default: none)
    mode         practical | theory  (default practical)
    lambda_scale threshold constant in practical mode (default 1.0)
    grid.tau     auto | number | comma list tau(1),...,tau(d)
    grid.z       auto | number
    anchors      auto | explicit
    anchors.values  comma list, one anchor per coordinate (explicit anchors)
    hbar         dyadic:<k> (levels 0..k) | dyadic:<a>..<b> | h;h;...  (h comma separated)
    pbar         all | P;P;...  (P in the 1-based "1,2|3" form)

With automatic anchors each coordinate gets the dyadic projection of
``n^{-1/(2 beta_max + d_bar)}``, ``tau = 2 beta_max / (2 beta_max + d_bar)`` and
``z = 1 / (2 beta_max)``, where ``d_bar`` is the smallest largest-block size in
``pbar``.  Explicit anchors default to ``tau = 1`` and ``z = 1``.

Experiment keys (``simulate`` / ``sweep``)::

    density      example1 | gaussian
    d, sigma, x0, n, n_values, replications, seed
    compare_pbar optional second pbar, evaluated on the same draws
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .kernels import HigherOrderKernel, make_kernel
from .partitions import Partition, enumerate_partitions
from .rates import adaptive_anchor
from .selection import CandidateSet, GridConfig, Thresholds, build_candidates, thresholds


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_kv(path: str | Path) -> dict[str, str]:
    return parse_kv(Path(path).read_text())


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def parse_hbar(text: str, d: int) -> list[tuple[float, ...]]:
    text = text.strip()
    if text.startswith("dyadic:"):
        spec = text[len("dyadic:"):]
        if ".." in spec:
            lo, hi = (int(t) for t in spec.split(".."))
        else:
            lo, hi = 0, int(spec)
        if lo < 0 or hi < lo:
            raise ValueError(f"bad dyadic level range {spec!r}")
        levels = [2.0 ** -k for k in range(lo, hi + 1)]
        return [tuple(h) for h in itertools.product(levels, repeat=d)]
    hs = [parse_floats(part) for part in text.split(";") if part.strip()]
    for h in hs:
        if len(h) != d:
            raise ValueError(f"bandwidth {h} has {len(h)} entries, expected d={d}")
    return hs


def parse_pbar(text: str, d: int, d0_cap: int | None = None) -> list[Partition]:
    text = text.strip()
    if text == "all":
        return enumerate_partitions(d, d0_cap)
    return [Partition.parse(part, d) for part in text.split(";") if part.strip()]


@dataclass(frozen=True)
class EstimatorConfig:
    l: int = 2
    q: float = 1.0
    beta_max: float = 1.0
    d0_cap: int | None = None
    mode: str = "practical"
    lambda_scale: float = 1.0
    tau: str = "auto"
    z: str = "auto"
    anchors: str = "auto"
    anchor_values: tuple[float, ...] | None = None
    hbar: str = "dyadic:6"
    pbar: str = "all"

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "EstimatorConfig":
        cfg = cls()
        mapping = {
            "l": ("l", int), "q": ("q", float), "beta_max": ("beta_max", float),
            "d0_cap": ("d0_cap", lambda s: int(s) if s else None), "mode": ("mode", str),
            "lambda_scale": ("lambda_scale", float), "grid.tau": ("tau", str), "grid.z": ("z", str),
            "anchors": ("anchors", str), "anchors.values": ("anchor_values", parse_floats),
            "hbar": ("hbar", str), "pbar": ("pbar", str),
        }
        updates = {}
        for key, (attr, conv) in mapping.items():
            if key in kv:
                updates[attr] = conv(kv[key])
        cfg = replace(cfg, **updates)
        cfg.validate()
        return cfg

    def validate(self):
        if self.mode not in ("practical", "theory"):
            raise ValueError(f"mode must be 'practical' or 'theory', got {self.mode!r}")
        if self.anchors not in ("auto", "explicit"):
            raise ValueError(f"anchors must be 'auto' or 'explicit', got {self.anchors!r}")
        if self.anchors == "explicit" and not self.anchor_values:
            raise ValueError("anchors = explicit requires anchors.values")
        if self.q < 1:
            raise ValueError("q must be >= 1")

    def kernel(self) -> HigherOrderKernel:
        return make_kernel(self.l)

    def partitions(self, d: int) -> list[Partition]:
        return parse_pbar(self.pbar, d, self.d0_cap)

    def grid_parameters(self, d: int, pbar: Sequence[Partition]) -> tuple[tuple[float, ...], float]:
        d_bar = min(P.max_block_size for P in pbar)
        auto = self.anchors == "auto"
        if self.tau == "auto":
            t = 2 * self.beta_max / (2 * self.beta_max + d_bar) if auto else 1.0
            tau = (t,) * d
        else:
            vals = parse_floats(self.tau)
            tau = vals * d if len(vals) == 1 else vals
        z = (1.0 / (2 * self.beta_max) if auto else 1.0) if self.z == "auto" else float(self.z)
        return tau, z

    def anchor_vector(self, n: int, d: int, pbar: Sequence[Partition]) -> tuple[float, ...]:
        if self.anchors == "explicit":
            vals = self.anchor_values
            if len(vals) == 1:
                vals = vals * d
            if len(vals) != d:
                raise ValueError(f"anchors.values must have 1 or d={d} entries")
            return tuple(vals)
        d_bar = min(P.max_block_size for P in pbar)
        return adaptive_anchor(tuple(range(d)), n, self.beta_max, d_bar)

    def thresholds(self, d: int, kernel: HigherOrderKernel | None = None, pbar=None) -> Thresholds:
        kernel = self.kernel() if kernel is None else kernel
        pbar = self.partitions(d) if pbar is None else pbar
        tau, z = self.grid_parameters(d, pbar)
        return thresholds(self.mode, self.q, d, kernel, self.lambda_scale, z, min(tau))

    def candidate_set(self, n: int, d: int, kernel: HigherOrderKernel | None = None,
                      thr: Thresholds | None = None) -> CandidateSet:
        pbar = self.partitions(d)
        tau, z = self.grid_parameters(d, pbar)
        thr = self.thresholds(d, kernel, pbar) if thr is None else thr
        grid = GridConfig(anchors=self.anchor_vector(n, d, pbar), tau=tau, z=z, a=thr.a, n=n)
        return build_candidates(parse_hbar(self.hbar, d), pbar, grid)


@dataclass(frozen=True)
class ExperimentConfig:
    estimator: EstimatorConfig
    density: str = "example1"
    d: int = 2
    sigma: float = 1.0
    x0: tuple[float, ...] | None = None
    n: int = 4096
    n_values: tuple[int, ...] = ()
    replications: int = 200
    seed: int = 0
    compare_pbar: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "ExperimentConfig":
        est = EstimatorConfig.from_kv(kv)
        d = int(kv.get("d", 2))
        x0 = parse_floats(kv["x0"]) if "x0" in kv else None
        cfg = cls(
            estimator=est, density=kv.get("density", "example1"), d=d, sigma=float(kv.get("sigma", 1.0)),
            x0=x0, n=int(kv.get("n", 4096)),
            n_values=tuple(int(v) for v in kv["n_values"].split(",")) if "n_values" in kv else (),
            replications=int(kv.get("replications", 200)), seed=int(kv.get("seed", 0)),
            compare_pbar=kv.get("compare_pbar"),
        )
        if cfg.replications < 2:
            raise ValueError("replications must be >= 2")
        if cfg.x0 is not None and len(cfg.x0) != d:
            raise ValueError(f"x0 has {len(cfg.x0)} entries, expected d={d}")
        return cfg

    def query_point(self) -> tuple[float, ...]:
        if self.x0 is not None:
            return self.x0
        return (0.5,) * self.d if self.density == "example1" else (0.0,) * self.d

    def comparator(self) -> EstimatorConfig | None:
        if not self.compare_pbar:
            return None
        return replace(self.estimator, pbar=self.compare_pbar)
