"""Repair pass run after the four steps leave defects behind.

Each remaining defect gets a connection attempt: a leftover target hole is
joined to the nearest matched reservoir atom, a leftover misplaced atom to the
nearest empty site it may legally occupy, both along a cheapest path through
atoms. The atoms on the path are parked on the nearest empty site off the path,
or, when none is reachable, shifted along the path toward its empty end. The
defect then moves, the four steps are rerun, and the attempt is kept only if
the number of defects went down; otherwise every move is rolled back and the
next path is tried with the stubborn atoms walled off. Keeping only strict
improvements rules out cycles.
"""

from __future__ import annotations

from typing import Callable

from ..species import EMPTY
from .board import Board, MoveBudgetExceeded
from .steps import _obstacle_cost, supply_path

# Paths tried per defect before giving up on it.
ATTEMPTS = 6


def defect_key(b: Board) -> tuple[int, int]:
    """(defects, misplaced atoms): turning a misplaced atom into a hole counts as progress."""
    misplaced = len(b.misplaced())
    return len(b.empty_targets()) + misplaced, misplaced


def _shift(b: Board, seq: list[int], i: int) -> bool:
    """Move the atom at ``seq[i]`` forward along ``seq`` onto the farthest site it may occupy."""
    occ, targets = b.occ, b.targets
    sp = occ[seq[i]]
    landing = None
    for j in range(i + 1, len(seq)):
        w = seq[j]
        if occ[w]:
            break
        if not targets[w] or targets[w] == sp:
            landing = j
    if landing is None:
        return False
    b.move(tuple(seq[i : landing + 1]))
    return True


def _clear_one(b: Board, path: list[int], toward: int, pinned: set[int]) -> bool:
    """Clear one obstacle from the interior of ``path``; False if none can move.

    Parked atoms are pinned so later plans route around them.
    """
    on_path = set(path)
    obstacles = [p for p in path[1:-1] if b.occ[p]]
    for p in obstacles + obstacles[::-1]:
        route = b.park_site(p, on_path)
        if route is not None:
            b.move(route)
            pinned.add(route[-1])
            return True
    for p in obstacles:
        if _push_park(b, p, on_path | pinned):
            return True
    seq = path if toward == -1 else path[::-1]
    return any(b.occ[seq[i]] and _shift(b, seq, i) for i in range(len(seq) - 2, 0, -1))


def _push_park(b: Board, p: int, exclude: set[int]) -> bool:
    """Vacate ``p`` by pushing a chain of atoms one by one toward an empty site off ``exclude``."""
    occ = b.occ
    cost = _obstacle_cost(b, exclude)
    seq = b.cheapest_path(p, lambda w: occ[w] == EMPTY and w not in exclude, cost)
    if seq is None:
        return False
    for i in range(len(seq) - 2, -1, -1):
        if occ[seq[i]] and not _shift(b, seq, i):
            return False
    return not occ[p]


def _connect(b: Board, path: list[int], toward: int, pinned: set[int]) -> bool:
    """Clear ``path`` and move the atom at its far end from the empty end."""
    for _ in range(2 * len(path) + 4):
        if not any(b.occ[p] for p in path[1:-1]):
            seq = path if toward == -1 else path[::-1]
            return bool(b.occ[seq[0]]) and _shift(b, seq, 0)
        if not _clear_one(b, path, toward, pinned):
            return False
    return False


def _exit_path(b: Board, m: int, walls: set[int]) -> list[int] | None:
    occ, targets = b.occ, b.targets
    sp = occ[m]

    def is_goal(w: int) -> bool:
        return occ[w] == EMPTY and (not targets[w] or targets[w] == sp)

    return b.cheapest_path(m, is_goal, _obstacle_cost(b, walls))


def _repair(b: Board, site: int, rerun: Callable[[], None]) -> bool:
    """Try up to ``ATTEMPTS`` connecting paths for the defect at ``site``.

    Hitting the move cap mid-attempt rolls the attempt back and re-raises.
    """
    before = defect_key(b)
    hole = not b.occ[site]
    walls: set[int] = set()
    for _ in range(ATTEMPTS):
        path = supply_path(b, site, walls) if hole else _exit_path(b, site, walls)
        if path is None:
            return False
        interior = [p for p in path[1:-1] if b.occ[p]]
        mark = len(b.moves)
        try:
            if _connect(b, path, 0 if hole else -1, set()):
                rerun()
                if defect_key(b) < before:
                    return True
        except MoveBudgetExceeded:
            b.rollback(mark)
            raise
        b.rollback(mark)
        if not interior:
            return False
        walls.update(interior)
    return False


def connect_defects(b: Board, budget: int, rerun: Callable[[], None]) -> int:
    """Repair defects one at a time until none improves; returns net moves spent.

    ``rerun`` replays the four steps on ``b``. Stops early, keeping the board
    as it was before the failed attempt, once the move cap would be exceeded.
    """
    start = len(b.moves)
    stalled: set[int] = set()
    while len(b.moves) - start < budget:
        todo = [t for t in b.empty_targets() + b.misplaced() if t not in stalled]
        if not todo:
            break
        for site in todo:
            try:
                fixed = _repair(b, site, rerun)
            except MoveBudgetExceeded:
                return len(b.moves) - start
            if fixed:
                stalled.clear()
                break
            stalled.add(site)
        else:
            break
    return len(b.moves) - start
