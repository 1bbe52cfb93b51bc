"""Feature maps on a finite input space, represented by their fibers.

Two feature maps with the same fibers induce the same conditionals and the
same achievable predictors, so a map ``Phi: X -> H`` is stored as the
partition of X it induces.  Atoms of X are numbered row-major over X1 x X2
and a partition is the restricted growth string of cell ids: cell ids appear
in first-occurrence order, which makes equal fibers compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "FeaturePartition",
    "bell_number",
    "restricted_growth_strings",
    "iter_partitions",
    "projection_x1",
    "projection_x2",
    "constant_partition",
    "singletons",
    "parse_phi",
]


def _is_canonical(labels: Sequence[int]) -> bool:
    nxt = 0
    for c in labels:
        if c == nxt:
            nxt += 1
        elif not 0 <= c < nxt:
            return False
    return True


@dataclass(frozen=True)
class FeaturePartition:
    """Cell assignment of every atom; ``labels[a]`` is the cell of atom ``a``."""

    labels: tuple[int, ...]

    def __post_init__(self):
        if not _is_canonical(self.labels):
            raise ValueError(f"labels {self.labels} are not in first-occurrence order")

    @classmethod
    def from_assignment(cls, assignment: Sequence) -> FeaturePartition:
        """Canonicalize any hashable per-atom assignment (e.g. raw feature values)."""
        ids: dict = {}
        return cls(tuple(ids.setdefault(v, len(ids)) for v in assignment))

    @property
    def n_atoms(self) -> int:
        return len(self.labels)

    @property
    def n_cells(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    @cached_property
    def _cells(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_cells)]
        for a, c in enumerate(self.labels):
            out[c].append(a)
        return tuple(tuple(c) for c in out)

    def cells(self) -> tuple[tuple[int, ...], ...]:
        """Atoms of each cell, in cell order."""
        return self._cells

    def cell_of(self, atom: int) -> int:
        return self.labels[atom]

    def factors_through_x1(self, n2: int) -> bool:
        """True when the map is constant in x2 (depends on the X1 coordinate only)."""
        return all(
            len(set(self.labels[i * n2 : (i + 1) * n2])) == 1 for i in range(len(self.labels) // n2)
        )

    def __str__(self):
        return ",".join(map(str, self.labels))


@lru_cache(maxsize=None)
def bell_number(n: int) -> int:
    """Number of set partitions of an n-element set (Bell triangle)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _rgs(n: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(pos: int, used: int):
        if pos == n:
            yield tuple(labels)
            return
        for c in range(min(used + 1, max_blocks)):
            labels[pos] = c
            yield from rec(pos + 1, max(used, c + 1))

    labels[0] = 0
    yield from rec(1, 1)


@lru_cache(maxsize=32)
def restricted_growth_strings(n: int, max_blocks: int) -> np.ndarray:
    """All partitions of ``n`` atoms into at most ``max_blocks`` cells, lexicographic.

    Returned as a read-only ``(count, n)`` integer array.
    """
    if max_blocks < 1:
        return np.zeros((0, n), dtype=np.int8)
    arr = np.array(list(_rgs(n, max_blocks)), dtype=np.int8).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def iter_partitions(n: int, max_blocks: int | None = None) -> Iterator[FeaturePartition]:
    for labels in _rgs(n, n if max_blocks is None else max_blocks):
        yield FeaturePartition(labels)


def projection_x1(instance) -> FeaturePartition:
    return FeaturePartition.from_assignment(
        i1 for i1 in range(instance.n1) for _ in range(instance.n2)
    )


def projection_x2(instance) -> FeaturePartition:
    return FeaturePartition.from_assignment(
        i2 for _ in range(instance.n1) for i2 in range(instance.n2)
    )


def constant_partition(instance) -> FeaturePartition:
    return FeaturePartition((0,) * instance.n_atoms)


def singletons(instance) -> FeaturePartition:
    return FeaturePartition(tuple(range(instance.n_atoms)))


_NAMED = {
    "x1-projection": projection_x1,
    "x2-projection": projection_x2,
    "constant": constant_partition,
    "singletons": singletons,
}


def parse_phi(instance, text: str) -> FeaturePartition:
    """Parse a named feature map or a comma-separated per-atom assignment."""
    text = text.strip()
    if text in _NAMED:
        return _NAMED[text](instance)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != instance.n_atoms:
        raise ValueError(
            f"phi {text!r}: expected one of {sorted(_NAMED)} or {instance.n_atoms} comma-separated cell ids"
        )
    return FeaturePartition.from_assignment(parts)
