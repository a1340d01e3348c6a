"""Empty-site graph connectivity: components, partition numbers, the Delta-C identity.

The empty-site graph is the subgraph of the trap graph induced on the empty
sites. Lower component count means atoms have more room to manoeuvre.

All public functions accept an :class:`ArrayState` or a bare occupancy list;
the solver passes lists to skip the wrapper.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .lattice import TrapGraph
from .species import EMPTY
from .state import ArrayState


@dataclass(frozen=True)
class ComponentLabeling:
    """``component_of[i]`` is the component id of empty site ``i``, ``-1`` for occupied sites."""

    component_of: tuple[int, ...]
    count: int

    def members(self, cid: int) -> list[int]:
        return [i for i, c in enumerate(self.component_of) if c == cid]


def _occ(s: ArrayState | Sequence[int]) -> Sequence[int]:
    return s.occupancy if isinstance(s, ArrayState) else s


def label_empty(nbrs: Sequence[Sequence[int]], occ: Sequence[int]) -> tuple[list[int], int]:
    labels = [-1] * len(occ)
    count = 0
    for start, v in enumerate(occ):
        if v != EMPTY or labels[start] >= 0:
            continue
        labels[start] = count
        queue = [start]
        for u in queue:
            for w in nbrs[u]:
                if occ[w] == EMPTY and labels[w] < 0:
                    labels[w] = count
                    queue.append(w)
        count += 1
    return labels, count


def cut_increments(nbrs: Sequence[Sequence[int]], occ: Sequence[int], root: int) -> dict[int, int]:
    """Partition numbers of every empty site in ``root``'s component.

    Iterative Tarjan articulation-point search. For a non-root vertex the
    increment is the number of DFS children whose low-link does not climb
    above it; for the root it is (children - 1), clamped at zero.
    """
    disc = {root: 0}
    low = {root: 0}
    inc = {root: -1}
    stack = [(root, -1, iter(nbrs[root]))]
    clock = 1
    while stack:
        v, parent, it = stack[-1]
        for w in it:
            if occ[w] != EMPTY:
                continue
            if w not in disc:
                disc[w] = low[w] = clock
                clock += 1
                inc[w] = 0
                stack.append((w, v, iter(nbrs[w])))
                break
            if w != parent and disc[w] < low[v]:
                low[v] = disc[w]
        else:
            stack.pop()
            if stack:
                p = stack[-1][0]
                if low[v] < low[p]:
                    low[p] = low[v]
                if p == root:
                    inc[root] += 1
                elif low[v] >= disc[p]:
                    inc[p] += 1
    if inc[root] < 0:
        inc[root] = 0
    return inc


def count_adjacent_components(nbrs: Sequence[Sequence[int]], occ: Sequence[int], site: int) -> int:
    """Number of distinct empty components touching ``site``."""
    seen: set[int] = set()
    count = 0
    for start in nbrs[site]:
        if occ[start] != EMPTY or start in seen:
            continue
        count += 1
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in nbrs[u]:
                if w != site and occ[w] == EMPTY and w not in seen:
                    seen.add(w)
                    queue.append(w)
    return count


def empty_components(g: TrapGraph, s: ArrayState | Sequence[int]) -> ComponentLabeling:
    labels, count = label_empty(g.neighbors, _occ(s))
    return ComponentLabeling(tuple(labels), count)


def partition_numbers(g: TrapGraph, s: ArrayState | Sequence[int]) -> dict[int, int]:
    """Empty-site partition number for every empty site."""
    occ = _occ(s)
    out: dict[int, int] = {}
    for i, v in enumerate(occ):
        if v == EMPTY and i not in out:
            out.update(cut_increments(g.neighbors, occ, i))
    return out


def empty_site_partition_number(g: TrapGraph, s: ArrayState | Sequence[int], site: int) -> int:
    """Components gained by deleting empty ``site`` (0 for an isolated site)."""
    occ = _occ(s)
    if occ[site] != EMPTY:
        raise ValueError(f"site {site} is occupied; empty-site partition number undefined")
    return cut_increments(g.neighbors, occ, site)[site]


def atom_partition_number(g: TrapGraph, s: ArrayState | Sequence[int], atom_site: int) -> int | None:
    """Components merged by vacating ``atom_site``; ``None`` for a non-movable atom."""
    occ = _occ(s)
    if occ[atom_site] == EMPTY:
        raise ValueError(f"site {atom_site} is empty; atom partition number undefined")
    k = count_adjacent_components(g.neighbors, occ, atom_site)
    return None if k == 0 else k - 1


def delta_C(g: TrapGraph, s: ArrayState | Sequence[int], atom_site: int, dest: int) -> int:
    """Drop in component count when the atom at ``atom_site`` moves to ``dest``.

    Evaluated as P(G, atom) - P(G_t, dest), with G_t the empty-site graph
    after vacating ``atom_site``.
    """
    occ = list(_occ(s))
    p_atom = atom_partition_number(g, occ, atom_site)
    if p_atom is None:
        raise ValueError(f"atom at {atom_site} is not movable")
    if occ[dest] != EMPTY:
        raise ValueError(f"destination {dest} is occupied")
    occ[atom_site] = EMPTY
    inc = cut_increments(g.neighbors, occ, atom_site)
    if dest not in inc:
        raise ValueError(f"destination {dest} is not reachable from {atom_site}")
    return p_atom - inc[dest]
