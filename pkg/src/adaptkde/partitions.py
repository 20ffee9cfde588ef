"""Set partitions of the coordinate set, used as independence hypotheses.

Indices are 0-based internally.  The text form (``"1,2|3,4"``) is 1-based,
which is what configs and the CLI use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_ENUM_DIM = 8

Block = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Partition:
    """Disjoint, nonempty blocks covering ``{0, ..., d-1}``.

    Blocks are stored sorted, and ordered by their smallest element, so two
    equal partitions compare equal structurally.  The dataclass ordering
    (by ``blocks``) is the canonical total order used for tie-breaking.
    """

    blocks: tuple[Block, ...]
    d: int

    def __init__(self, blocks: Iterable[Iterable[int]], d: int | None = None):
        canon = sorted((tuple(sorted(set(b))) for b in blocks), key=lambda b: b[0] if b else -1)
        flat = [i for b in canon for i in b]
        if d is None:
            d = max(flat) + 1 if flat else 0
        if d < 1:
            raise ValueError("partition dimension must be positive")
        if any(len(b) == 0 for b in canon):
            raise ValueError("partition blocks must be nonempty")
        if sorted(flat) != list(range(d)):
            raise ValueError(f"blocks {canon} do not partition {{0..{d - 1}}}")
        object.__setattr__(self, "blocks", tuple(canon))
        object.__setattr__(self, "d", d)

    @classmethod
    def one_block(cls, d: int) -> "Partition":
        return cls([range(d)], d)

    @classmethod
    def singletons(cls, d: int) -> "Partition":
        return cls([[i] for i in range(d)], d)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "Partition":
        """Parse the 1-based text form, e.g. ``"1,2|3"``."""
        try:
            blocks = [[int(tok) - 1 for tok in part.split(",")] for part in text.strip().split("|")]
        except ValueError as exc:
            raise ValueError(f"malformed partition text {text!r}") from exc
        return cls(blocks, d)

    def __str__(self) -> str:
        return "|".join(",".join(str(i + 1) for i in b) for b in self.blocks)

    def __repr__(self) -> str:
        return f"Partition({str(self)!r})"

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def max_block_size(self) -> int:
        return max(len(b) for b in self.blocks)

    def is_one_block(self) -> bool:
        return len(self.blocks) == 1


def compose(P: Partition, Q: Partition) -> Partition:
    """Common refinement: all nonempty intersections of a block of P with a block of Q."""
    if P.d != Q.d:
        raise ValueError(f"dimension mismatch: {P.d} vs {Q.d}")
    out = []
    for I in P.blocks:
        sI = set(I)
        for J in Q.blocks:
            common = sI.intersection(J)
            if common:
                out.append(common)
    return Partition(out, P.d)


def _restricted_growth(d: int):
    # Restricted growth strings enumerate each set partition exactly once.
    a = [0] * d

    def rec(i: int, mx: int):
        if i == d:
            yield tuple(a)
            return
        for v in range(mx + 2):
            a[i] = v
            yield from rec(i + 1, max(mx, v))

    if d == 0:
        return
    a[0] = 0
    yield from rec(1, 0)


def enumerate_partitions(d: int, d0_cap: int | None = None) -> list[Partition]:
    """All partitions of ``{0..d-1}``, in canonical order.

    With ``d0_cap`` only the one-block partition and partitions whose blocks
    all have size ``<= d0_cap`` are kept.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if d > MAX_ENUM_DIM:
        raise ValueError(f"refusing to enumerate partitions for d={d} > {MAX_ENUM_DIM}; supply them explicitly")
    parts = []
    for rgs in _restricted_growth(d):
        nblocks = max(rgs) + 1
        blocks = [[i for i in range(d) if rgs[i] == k] for k in range(nblocks)]
        P = Partition(blocks, d)
        if d0_cap is None or P.is_one_block() or P.max_block_size <= d0_cap:
            parts.append(P)
    return sorted(parts)


def project(x: Sequence[float] | np.ndarray, I: Sequence[int]) -> np.ndarray:
    """Coordinates of ``x`` at the indices of ``I`` (ascending)."""
    return np.asarray(x, dtype=float)[list(sorted(I))]
