"""Mutable working state shared by the solver steps."""

from __future__ import annotations

import heapq
from typing import Iterable

from ..connectivity import cut_increments, label_empty
from ..lattice import TrapGraph
from ..pathing import Move, nearest_outside_atom, trace
from ..species import EMPTY, Species


class MoveBudgetExceeded(RuntimeError):
    pass


class Board:
    """Occupancy list plus the move log; every mutation goes through :meth:`move`."""

    def __init__(self, g: TrapGraph, occ: list[int], max_moves: int | None = None):
        self.g = g
        self.nbrs = g.neighbors
        self.targets = g.targets
        self.occ = occ
        self.moves: list[Move] = []
        self.max_moves = max_moves

    # -- mutation ---------------------------------------------------------

    def move(self, path: tuple[int, ...]) -> None:
        occ = self.occ
        src, dst = path[0], path[-1]
        sp = occ[src]
        if not sp or occ[dst]:
            raise AssertionError(f"solver produced an illegal move {path}")
        if self.max_moves is not None and len(self.moves) >= self.max_moves:
            raise MoveBudgetExceeded(f"move cap {self.max_moves} reached")
        occ[src] = EMPTY
        occ[dst] = sp
        self.moves.append(Move(Species(sp), path))

    def rollback(self, mark: int) -> None:
        """Undo every move after the first ``mark`` ones."""
        occ = self.occ
        while len(self.moves) > mark:
            m = self.moves.pop()
            occ[m.dest] = EMPTY
            occ[m.source] = int(m.species)

    # -- queries ----------------------------------------------------------

    def misplaced(self) -> list[int]:
        occ, targets = self.occ, self.targets
        return [i for i in self.g.target_sites if occ[i] and occ[i] != targets[i]]

    def empty_targets(self) -> list[int]:
        occ = self.occ
        return [i for i in self.g.target_sites if not occ[i]]

    def solved(self) -> bool:
        occ, targets = self.occ, self.targets
        return all(occ[i] == targets[i] for i in self.g.target_sites)

    def reach(self, atom: int) -> tuple[list[int], dict[int, int], dict[int, int]]:
        """BFS through empty sites from ``atom``: (visit order, parents, hop distance)."""
        occ, nbrs = self.occ, self.nbrs
        parent = {atom: -1}
        dist = {atom: 0}
        order = []
        queue = [atom]
        for u in queue:
            du = dist[u] + 1
            for w in nbrs[u]:
                if occ[w] == EMPTY and w not in parent:
                    parent[w] = u
                    dist[w] = du
                    order.append(w)
                    queue.append(w)
        return order, parent, dist

    def cuts_without(self, atom: int) -> dict[int, int]:
        """Empty-site partition numbers in the graph where ``atom``'s site is vacated."""
        occ = self.occ
        sp = occ[atom]
        occ[atom] = EMPTY
        try:
            return cut_increments(self.nbrs, occ, atom)
        finally:
            occ[atom] = sp

    def has_exit(self, atom: int) -> bool:
        """Whether a misplaced atom can reach any empty outside site or matched target."""
        occ, targets = self.occ, self.targets
        sp = occ[atom]
        order, _, _ = self.reach(atom)
        return any(targets[s] == 0 or targets[s] == sp for s in order)

    def blocks_neighbours(self, src: int, dst: int) -> bool:
        """Would moving the atom at ``src`` to ``dst`` newly trap a misplaced atom next to ``dst``?"""
        occ, targets = self.occ, self.targets
        watch = [
            q
            for q in self.nbrs[dst]
            if q != src and occ[q] and targets[q] and occ[q] != targets[q]
        ]
        if not watch:
            return False
        before = {q: self.has_exit(q) for q in watch}
        sp = occ[src]
        occ[src], occ[dst] = EMPTY, sp
        try:
            return any(before[q] and not self.has_exit(q) for q in watch)
        finally:
            occ[src], occ[dst] = sp, EMPTY

    def supply(self, site: int, species: int | None = None) -> tuple[int, int] | None:
        """Nearest reservoir atom able to reach ``site`` (``(atom, hops)``)."""
        if species is None:
            species = self.targets[site]
        return nearest_outside_atom(self.g, self.occ, site, species)

    def labels(self) -> tuple[list[int], int]:
        return label_empty(self.nbrs, self.occ)

    def enclosed_components(self) -> list[list[int]]:
        """Empty components made only of target sites, each as a sorted site list."""
        labels, count = self.labels()
        members: list[list[int]] = [[] for _ in range(count)]
        open_comp = [False] * count
        targets = self.targets
        for i, c in enumerate(labels):
            if c >= 0:
                members[c].append(i)
                if not targets[i]:
                    open_comp[c] = True
        return [m for c, m in enumerate(members) if not open_comp[c]]

    def park_site(
        self, atom: int, exclude: Iterable[int] = (), avoid_blocking: bool = False
    ) -> tuple[int, ...] | None:
        """Path to the nearest empty site off ``exclude`` that creates no misplacement.

        Ties at equal hop count go to a matched target site, then the smallest id.
        """
        occ, targets = self.occ, self.targets
        sp = occ[atom]
        excluded = set(exclude)
        order, parent, dist = self.reach(atom)
        best = None
        best_key = None
        for s in order:
            if best_key is not None and dist[s] > best_key[0]:
                break
            if s in excluded or (targets[s] and targets[s] != sp):
                continue
            if avoid_blocking and self.blocks_neighbours(atom, s):
                continue
            key = (dist[s], 0 if targets[s] == sp else 1, s)
            if best_key is None or key < best_key:
                best, best_key = s, key
        return None if best is None else trace(parent, best)

    def cheapest_path(self, start: int, is_goal, cost) -> list[int] | None:
        """Path from ``start`` to the first goal site in (obstacle cost, hops) order.

        ``cost(site)`` prices stepping onto an occupied site (``None`` = wall);
        empty sites are free. Goal sites end the search and are never crossed.
        """
        occ, nbrs = self.occ, self.nbrs
        best = {start: (0, 0)}
        parent = {start: -1}
        heap = [(0, 0, start)]
        while heap:
            c, h, u = heapq.heappop(heap)
            if best[u] != (c, h):
                continue
            if u != start and is_goal(u):
                path = [u]
                while parent[path[-1]] != -1:
                    path.append(parent[path[-1]])
                return path[::-1]
            for w in nbrs[u]:
                if occ[w] == EMPTY:
                    step = 0
                elif is_goal(w):
                    step = 0
                else:
                    step = cost(w)
                    if step is None:
                        continue
                key = (c + step, h + 1)
                old = best.get(w)
                if old is None or key < old:
                    best[w] = key
                    parent[w] = u
                    heapq.heappush(heap, (key[0], key[1], w))
        return None
