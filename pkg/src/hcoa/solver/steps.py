"""The four rearrangement steps, operating in place on a :class:`Board`.

Each step follows the same loop shape: build a priority list of work items,
try each in turn, and start a new pass while any item made progress.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from ..connectivity import count_adjacent_components
from ..pathing import trace
from ..species import EMPTY
from .board import Board


# Alternative paths tried once a path's obstacles turn out to be unmovable.
REPLANS = 16


@dataclass(frozen=True)
class Obstacle:
    atom_site: int
    block_number: int


# -- step 1: misplaced atoms ---------------------------------------------


def _relocate_misplaced(b: Board, m: int, allow_outside: bool) -> bool:
    order, parent, dist = b.reach(m)
    if not order:
        return False
    cuts = b.cuts_without(m)
    sp, targets = b.occ[m], b.targets
    groups = [[s for s in order if targets[s] == sp and cuts[s] == 0]]
    if allow_outside:
        groups.append([s for s in order if not targets[s] and cuts[s] == 0])
    for group in groups:
        for s in sorted(group, key=lambda s: (dist[s], s)):
            if not b.blocks_neighbours(m, s):
                b.move(trace(parent, s))
                return True
    return False


def _atom_partition_key(b: Board, m: int) -> tuple[int, int]:
    k = count_adjacent_components(b.nbrs, b.occ, m)
    return (-(k - 1) if k else 1, m)


def run_step1(b: Board, sort_by_atom_partition: bool = False) -> list[int]:
    """Move misplaced atoms to zero-partition empty sites; return those left over.

    Matched target sites are tried alone until a pass stalls; only then does
    one pass also admit reservoir sites, after which target-only passes resume.
    """
    allow_outside = False
    while True:
        pending = b.misplaced()
        if not pending:
            return []
        if sort_by_atom_partition:
            pending.sort(key=lambda m: _atom_partition_key(b, m))
        progress = False
        for m in pending:
            if _relocate_misplaced(b, m, allow_outside):
                progress = True
        if progress:
            allow_outside = False
        elif not allow_outside:
            allow_outside = True
        else:
            return pending


# -- step 2: obstacles and enclosed regions ------------------------------


def first_layer_obstacles(b: Board, unresolved: list[int]) -> list[Obstacle]:
    occ, nbrs = b.occ, b.nbrs
    counts: dict[int, int] = {}
    for m in unresolved:
        order, _, _ = b.reach(m)
        frontier = {q for q in nbrs[m] if occ[q]}
        for s in order:
            frontier.update(q for q in nbrs[s] if occ[q] and q != m)
        for q in frontier:
            counts[q] = counts.get(q, 0) + 1
    return [Obstacle(q, c) for q, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def _safe_destinations(b: Board, atom: int, exclude: frozenset[int] | set[int] = frozenset()):
    """Destinations meeting the three obstacle conditions, nearest first, matched targets first on ties."""
    order, parent, dist = b.reach(atom)
    if not order:
        return parent, []
    cuts = b.cuts_without(atom)
    sp, targets = b.occ[atom], b.targets
    cands = [
        s
        for s in order
        if cuts[s] == 0 and s not in exclude and (not targets[s] or targets[s] == sp)
    ]
    cands.sort(key=lambda s: (dist[s], 0 if targets[s] == sp else 1, s))
    return parent, cands


def _move_safely(b: Board, atom: int, exclude=frozenset(), prefer_targets: bool = False) -> int | None:
    parent, cands = _safe_destinations(b, atom, exclude)
    if prefer_targets:
        sp = b.occ[atom]
        cands.sort(key=lambda s: 0 if b.targets[s] == sp else 1)
    for s in cands:
        if not b.blocks_neighbours(atom, s):
            b.move(trace(parent, s))
            return s
    return None


def open_costs(b: Board) -> dict[int, int]:
    """Atoms that must be cleared to connect each site to an empty reservoir site.

    Crossing a matched target atom costs 2 (it leaves a hole to refill),
    any other atom 1.
    """
    occ, targets, nbrs = b.occ, b.targets, b.nbrs
    labels, count = b.labels()
    open_comp = [False] * count
    for i, c in enumerate(labels):
        if c >= 0 and not targets[i]:
            open_comp[c] = True
    cost = {}
    heap = []
    for i, c in enumerate(labels):
        if c >= 0 and open_comp[c]:
            cost[i] = 0
            heap.append((0, i))
    heapq.heapify(heap)
    while heap:
        c, u = heapq.heappop(heap)
        if cost[u] != c:
            continue
        for w in nbrs[u]:
            o = occ[w]
            step = 0 if o == EMPTY else (2 if targets[w] and o == targets[w] else 1)
            if w not in cost or c + step < cost[w]:
                cost[w] = c + step
                heapq.heappush(heap, (c + step, w))
    return cost


def _open_region(b: Board, region: list[int]) -> bool:
    occ, targets, nbrs = b.occ, b.targets, b.nbrs
    inside = set(region)
    boundary = sorted({q for s in region for q in nbrs[s] if occ[q]})
    demand = {targets[s] for s in region}
    # A reservoir atom touching the region and matching one of its sites fills it directly.
    for q in boundary:
        if not targets[q] and occ[q] in demand:
            parent, cands = _safe_destinations(b, q)
            for s in cands:
                if s in inside and targets[s] == occ[q] and not b.blocks_neighbours(q, s):
                    b.move(trace(parent, s))
                    return True
    cost = open_costs(b)
    inf = len(occ) * 2 + 1
    for q in sorted(boundary, key=lambda q: (cost.get(q, inf), 0 if not targets[q] else 1, q)):
        if targets[q] and occ[q] == targets[q]:
            exclude = inside
        else:
            exclude = frozenset()
        if _move_safely(b, q, exclude, prefer_targets=not targets[q]) is not None:
            return True
    return False


def open_enclosed_regions(b: Board) -> bool:
    """Connect every all-target empty component with the reservoir; True if none remain."""
    guard = len(b.g.target_sites) + 4
    while guard > 0:
        regions = b.enclosed_components()
        if not regions:
            return True
        if not any(_open_region(b, r) for r in regions):
            return False
        guard -= 1
    return not b.enclosed_components()


def run_step2(b: Board, unresolved: list[int], sort_by_atom_partition: bool = False) -> list[int]:
    guard = 4 * len(unresolved) + 8
    placed: set[int] = set()
    while unresolved and guard > 0:
        moved = False
        for ob in first_layer_obstacles(b, unresolved):
            if ob.atom_site in placed:
                continue
            dst = _move_safely(b, ob.atom_site)
            if dst is not None:
                placed.add(dst)
                moved = True
                break
        if not moved:
            break
        guard -= 1
        unresolved = run_step1(b, sort_by_atom_partition)
    open_enclosed_regions(b)
    return b.misplaced()


# -- step 3: filling -----------------------------------------------------


def target_depths(b: Board) -> dict[int, int | None]:
    """Breadth-first depth of each empty target site from the target-region boundary.

    Depth 0: empty target sites adjacent to a reservoir site, not all of whose
    reservoir neighbours hold atoms of the wrong species.
    """
    occ, targets, nbrs = b.occ, b.targets, b.nbrs
    empties = b.empty_targets()
    depth: dict[int, int | None] = {t: None for t in empties}
    frontier = []
    for t in empties:
        outside = [w for w in nbrs[t] if not targets[w]]
        if outside and any(occ[w] == EMPTY or occ[w] == targets[t] for w in outside):
            depth[t] = 0
            frontier.append(t)
    d = 0
    while frontier:
        nxt = []
        for u in frontier:
            for w in nbrs[u]:
                if w in depth and depth[w] is None:
                    depth[w] = d + 1
                    nxt.append(w)
        frontier = nxt
        d += 1
    return depth


def fill_order(b: Board) -> list[int]:
    occ = b.occ
    depth = target_depths(b)
    empties = list(depth)
    empty_nbrs = {t: sum(1 for w in b.nbrs[t] if occ[w] == EMPTY) for t in empties}
    return sorted(empties, key=lambda t: (-(depth[t] if depth[t] is not None else -1), empty_nbrs[t], t))


def _strands_neighbour(b: Board, src: int, dst: int) -> bool:
    occ, targets = b.occ, b.targets
    watch = [u for u in b.nbrs[dst] if targets[u] and occ[u] == EMPTY]
    if not watch:
        return False
    before = {u: b.supply(u) is not None for u in watch}
    sp = occ[src]
    occ[src], occ[dst] = EMPTY, sp
    try:
        return any(before[u] and b.supply(u) is None for u in watch)
    finally:
        occ[src], occ[dst] = sp, EMPTY


def _all_target_component(b: Board, start: int) -> bool:
    occ, targets, nbrs = b.occ, b.targets, b.nbrs
    seen = {start}
    queue = [start]
    for u in queue:
        if not targets[u]:
            return False
        for w in nbrs[u]:
            if occ[w] == EMPTY and w not in seen:
                seen.add(w)
                queue.append(w)
    return True


def _encloses(b: Board, src: int, dst: int) -> bool:
    occ, targets = b.occ, b.targets
    if _all_target_component(b, dst):
        return False
    sp = occ[src]
    occ[src], occ[dst] = EMPTY, sp
    try:
        return any(
            targets[u] and occ[u] == EMPTY and _all_target_component(b, u) for u in b.nbrs[dst]
        )
    finally:
        occ[src], occ[dst] = sp, EMPTY


def _fill(b: Board, t: int, guard) -> bool:
    hit = b.supply(t)
    if hit is None:
        return False
    atom = hit[0]
    if guard is not None and guard(b, atom, t):
        return False
    _, parent, _ = b.reach(atom)
    b.move(trace(parent, t))
    return True


def _fill_passes(b: Board, guard) -> list[int]:
    while True:
        order = fill_order(b)
        if not order:
            return []
        progress = False
        for t in order:
            if b.occ[t] == EMPTY and _fill(b, t, guard):
                progress = True
        if not progress:
            return b.empty_targets()


def run_step3(b: Board) -> list[int]:
    return _fill_passes(b, _strands_neighbour)


# -- step 4: leftovers ---------------------------------------------------


def _obstacle_cost(b: Board, walls: set[int] | frozenset[int] = frozenset()):
    occ, targets = b.occ, b.targets

    def cost(w: int) -> int | None:
        if w in walls:
            return None
        return 2 if targets[w] and occ[w] == targets[w] else 1

    return cost


def supply_path(b: Board, t: int, walls: set[int] | frozenset[int] = frozenset()) -> list[int] | None:
    """Cheapest path (fewest obstacle atoms, then hops) from ``t`` to a matched reservoir atom."""
    occ, targets = b.occ, b.targets
    sp = targets[t]
    return b.cheapest_path(t, lambda w: occ[w] == sp and not targets[w], _obstacle_cost(b, walls))


def _clear_and_fill(b: Board, t: int) -> bool:
    walls: set[int] = set()
    for _ in range(REPLANS):
        path = supply_path(b, t, walls)
        if path is None:
            return False
        on_path = set(path)
        obstacles = [p for p in path[1:-1] if b.occ[p]]
        while obstacles:
            for p in sorted(obstacles, key=lambda p: -path.index(p)):
                route = b.park_site(p, on_path, avoid_blocking=True)
                if route is not None:
                    b.move(route)
                    break
            else:
                walls.update(obstacles)
                break
            obstacles = [p for p in path[1:-1] if b.occ[p]]
        else:
            return _fill(b, t, None)
    return False


def run_step4(b: Board) -> list[int]:
    guard = len(b.g.target_sites) + 4
    while guard > 0:
        guard -= 1
        left = _fill_passes(b, _encloses)
        if not left:
            return []
        progress = False
        for t in fill_order(b):
            if b.occ[t] == EMPTY and _clear_and_fill(b, t):
                progress = True
        if not progress:
            break
    return b.empty_targets()
