"""Brute-force oracles.

They use networkx, plain flood fill or exhaustive search, so they share no
code with the package under test.
"""

from __future__ import annotations

import itertools
import random
from collections import deque

import networkx as nx

from hcoa.lattice import Site, TrapGraph
from hcoa.species import EMPTY


def empty_graph_nx(g: TrapGraph, occ) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(i for i in range(g.n) if occ[i] == EMPTY)
    h.add_edges_from((u, v) for u, v in g.edges if occ[u] == EMPTY and occ[v] == EMPTY)
    return h


def component_count(g: TrapGraph, occ) -> int:
    return nx.number_connected_components(empty_graph_nx(g, occ))


def flood(g: TrapGraph, occ, start: int) -> set[int]:
    """Empty sites connected to ``start`` (which must be empty)."""
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for a, b in g.edges:
            for x, y in ((a, b), (b, a)):
                if x == u and occ[y] == EMPTY and y not in seen:
                    seen.add(y)
                    stack.append(y)
    return seen


def naive_site_partition(g, occ, site):
    before = component_count(g, occ)
    cut = list(occ)
    cut[site] = 1
    return max(0, component_count(g, cut) - before)


def naive_atom_partition(g, occ, site):
    if not any(occ[w] == EMPTY for w in g.neighbors[site]):
        return None
    opened = list(occ)
    opened[site] = EMPTY
    return component_count(g, occ) - component_count(g, opened)


def random_graph(rng: random.Random, n: int, p: float) -> TrapGraph:
    sites = tuple(Site(i, (float(i), 0.0)) for i in range(n))
    edges = frozenset((u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p)
    return TrapGraph(sites, edges)


def random_occ(rng: random.Random, n: int, fill: float = 0.5) -> list[int]:
    return [rng.choice((1, 2)) if rng.random() < fill else EMPTY for _ in range(n)]


def label_graph(labels) -> TrapGraph:
    """A path graph carrying ``labels`` (0 = reservoir, 1/2 = target species)."""
    n = len(labels)
    sites = tuple(Site(i, (float(i), 0.0), None if not t else t) for i, t in enumerate(labels))
    return TrapGraph(sites, frozenset((i, i + 1) for i in range(n - 1)))


def _canonical(labels, cells):
    """Sites sharing a label are interchangeable under teleport moves; sort within each class."""
    classes = {}
    for t, c in zip(labels, cells):
        classes.setdefault(t, []).append(c)
    return tuple((t, tuple(sorted(classes[t]))) for t in sorted(classes))


def _bfs(labels, capacity: int):
    """Fewest teleport moves to a solved state, over states modulo site relabelling.

    Each site holds a sorted tuple of at most ``capacity`` atoms. Goal states
    hold at most one atom per site with every target matched. Moves are
    reversible, so a multi-source BFS from the goals gives forward minima.
    """
    n = len(labels)
    free = [i for i in range(n) if not labels[i]]
    dist = {}
    queue = deque()
    for fill in itertools.product(((), (1,), (2,)), repeat=len(free)):
        cells = [() if not t else (t,) for t in labels]
        for i, c in zip(free, fill):
            cells[i] = c
        key = _canonical(labels, cells)
        if key not in dist:
            dist[key] = 0
            queue.append(cells)
    while queue:
        cur = queue.popleft()
        d = dist[_canonical(labels, cur)] + 1
        for a in range(n):
            for sp in set(cur[a]):
                rest = list(cur[a])
                rest.remove(sp)
                for e in range(n):
                    if e == a or len(cur[e]) >= capacity:
                        continue
                    nxt = list(cur)
                    nxt[a] = tuple(rest)
                    nxt[e] = tuple(sorted(cur[e] + (sp,)))
                    key = _canonical(labels, nxt)
                    if key not in dist:
                        dist[key] = d
                        queue.append(nxt)
    return dist


class TeleportOracle:
    """Brute-force minimum teleport moves for every configuration over ``labels``.

    ``strict``: an atom may only land on an empty site.
    ``relaxed``: a site may briefly hold two atoms, the free-transport model
    in which the ideal-move formula is derived.
    """

    def __init__(self, labels, model: str):
        self.labels = tuple(labels)
        self.dist = _bfs(self.labels, 1 if model == "strict" else 2)

    def __call__(self, occ) -> int | None:
        cells = [() if v == EMPTY else (v,) for v in occ]
        return self.dist.get(_canonical(self.labels, cells))
