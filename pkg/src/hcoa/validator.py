"""Replay oracle for move sequences.

Deliberately shares no legality code with :mod:`hcoa.pathing`; it rebuilds
adjacency from the raw edge set and checks every rule itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .lattice import TrapGraph
from .pathing import MoveSequence
from .state import ArrayState


@dataclass
class Verdict:
    legal: bool
    achieves_target: bool
    first_violation: tuple[int, str] | None
    move_count: int
    total_hops: int
    total_euclidean_length: float
    final_state: list[int] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "legal": self.legal,
            "achieves_target": self.achieves_target,
            "first_violation": None
            if self.first_violation is None
            else {"move": self.first_violation[0], "reason": self.first_violation[1]},
            "move_count": self.move_count,
            "total_hops": self.total_hops,
            "total_euclidean_length": self.total_euclidean_length,
        }


def validate(g: TrapGraph, initial: ArrayState, seq: MoveSequence) -> Verdict:
    adjacent = set()
    for u, v in g.edges:
        adjacent.add((u, v))
        adjacent.add((v, u))
    pos = [site.position for site in g.sites]
    cells = list(initial.occupancy)
    hops = 0
    length = 0.0
    violation = None
    done = 0
    for k, move in enumerate(seq):
        path = list(move.path)
        code = int(move.species)
        reason = None
        if len(path) < 2:
            reason = "short-path"
        elif len(set(path)) != len(path):
            reason = "repeated-site"
        elif any(not 0 <= p < len(cells) for p in path):
            reason = "unknown-site"
        elif cells[path[0]] == 0:
            reason = "empty-pick"
        elif cells[path[0]] != code:
            reason = "wrong-species"
        else:
            for a, b in zip(path, path[1:]):
                if (a, b) not in adjacent:
                    reason = "not-adjacent"
                    break
            else:
                if any(cells[p] != 0 for p in path[1:-1]):
                    reason = "occupied-interior"
                elif cells[path[-1]] != 0:
                    reason = "occupied-release"
        if reason is not None:
            violation = (k, reason)
            break
        cells[path[0]] = 0
        cells[path[-1]] = code
        hops += len(path) - 1
        for a, b in zip(path, path[1:]):
            length += math.dist(pos[a], pos[b])
        done += 1
    achieved = violation is None and all(
        cells[i] == g.targets[i] for i in range(len(cells)) if g.targets[i]
    )
    return Verdict(
        legal=violation is None,
        achieves_target=achieved,
        first_violation=violation,
        move_count=done,
        total_hops=hops,
        total_euclidean_length=length,
        final_state=cells,
    )
