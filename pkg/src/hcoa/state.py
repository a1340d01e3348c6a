"""Occupancy state, site-atom pattern counts and the ideal move count."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .lattice import TrapGraph
from .species import EMPTY, Species


@dataclass
class ArrayState:
    """Per-site occupancy: ``0`` empty, ``1`` species A, ``2`` species B."""

    occupancy: list[int]

    def __post_init__(self) -> None:
        self.occupancy = [int(v) for v in self.occupancy]
        for i, v in enumerate(self.occupancy):
            if v not in (EMPTY, Species.A, Species.B):
                raise ValueError(f"bad occupancy code {v} at site {i}")

    @classmethod
    def empty(cls, n: int) -> "ArrayState":
        return cls([EMPTY] * n)

    def __len__(self) -> int:
        return len(self.occupancy)

    def __getitem__(self, site: int) -> int:
        return self.occupancy[site]

    def copy(self) -> "ArrayState":
        return ArrayState(list(self.occupancy))

    def count(self, species: int) -> int:
        return self.occupancy.count(int(species))

    def atoms(self) -> Iterable[int]:
        return (i for i, v in enumerate(self.occupancy) if v)


@dataclass(frozen=True)
class PatternCounts:
    """Counts of the six site-atom patterns over the target sites.

    n1: A atom on a B target     n2: B atom on an A target
    n3: empty B target           n4: empty A target
    n5: A atom on an A target    n6: B atom on a B target

    The empty-site numbering pairs n1 with n4: the n1 atoms and the n4
    sites are both A surplus/demand, which is what the ideal-move formula
    assumes.
    """

    n1: int = 0
    n2: int = 0
    n3: int = 0
    n4: int = 0
    n5: int = 0
    n6: int = 0

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.n1, self.n2, self.n3, self.n4, self.n5, self.n6)

    @property
    def total(self) -> int:
        return sum(self.as_tuple())

    @property
    def defects(self) -> int:
        return self.n1 + self.n2 + self.n3 + self.n4

    @property
    def solved(self) -> bool:
        return self.defects == 0

    def swapped(self) -> "PatternCounts":
        return PatternCounts(self.n2, self.n1, self.n4, self.n3, self.n6, self.n5)


def classify_patterns(g: TrapGraph, s: ArrayState | list[int]) -> PatternCounts:
    occ = s.occupancy if isinstance(s, ArrayState) else s
    c = [0] * 6
    for i in g.target_sites:
        t, o = g.targets[i], occ[i]
        if o == EMPTY:
            c[3 if t == Species.A else 2] += 1
        elif o == t:
            c[4 if t == Species.A else 5] += 1
        else:
            c[0 if o == Species.A else 1] += 1
    return PatternCounts(*c)


def ideal_move_count(c: PatternCounts) -> int:
    """Fewest moves if any atom could be carried straight to any site."""
    return max(c.n1, c.n2 + c.n4) + max(c.n2, c.n1 + c.n3)


def feasible(g: TrapGraph, s: ArrayState | list[int]) -> bool:
    occ = s.occupancy if isinstance(s, ArrayState) else s
    for sp in (Species.A, Species.B):
        if occ.count(int(sp)) < g.targets.count(int(sp)):
            return False
    return True
