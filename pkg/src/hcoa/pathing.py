"""Transport paths through empty sites, move application and branch factor."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .connectivity import label_empty
from .lattice import TrapGraph
from .species import EMPTY, Species
from .state import ArrayState


class IllegalMoveError(ValueError):
    pass


class NoPathError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    """One pick-transport-release; ``path[0]`` is the pick site, ``path[-1]`` the release site."""

    species: Species
    path: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "species", Species(self.species))
        object.__setattr__(self, "path", tuple(int(p) for p in self.path))
        if len(self.path) < 2:
            raise ValueError("a move path needs at least two sites")
        if len(set(self.path)) != len(self.path):
            raise ValueError(f"path revisits a site: {self.path}")

    @property
    def source(self) -> int:
        return self.path[0]

    @property
    def dest(self) -> int:
        return self.path[-1]

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    def reversed(self) -> "Move":
        return Move(self.species, self.path[::-1])

    def to_dict(self) -> dict:
        return {"species": self.species.name, "path": list(self.path)}


@dataclass
class MoveSequence:
    moves: list[Move] = field(default_factory=list)

    def __iter__(self) -> Iterator[Move]:
        return iter(self.moves)

    def __len__(self) -> int:
        return len(self.moves)

    def __getitem__(self, k: int) -> Move:
        return self.moves[k]

    @property
    def total_hops(self) -> int:
        return sum(m.hops for m in self.moves)

    def euclidean_length(self, g: TrapGraph) -> float:
        return sum(g.distance(u, v) for m in self.moves for u, v in zip(m.path, m.path[1:]))

    def to_dict(self) -> dict:
        return {"moves": [m.to_dict() for m in self.moves]}

    @classmethod
    def from_dict(cls, data: object) -> "MoveSequence":
        if not isinstance(data, dict) or not isinstance(data.get("moves"), list):
            raise ValueError("moves file: expected an object with a 'moves' list")
        out = []
        for k, entry in enumerate(data["moves"]):
            try:
                out.append(Move(Species.parse(entry["species"]), tuple(entry["path"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"moves[{k}]: {exc}") from None
        return cls(out)


def save_moves(seq: MoveSequence, path: str | Path) -> None:
    Path(path).write_text(json.dumps(seq.to_dict()) + "\n")


def load_moves(path: str | Path) -> MoveSequence:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return MoveSequence.from_dict(data)


def _occ(s: ArrayState | Sequence[int]) -> Sequence[int]:
    return s.occupancy if isinstance(s, ArrayState) else s


def bfs_from_atom(
    nbrs: Sequence[Sequence[int]], occ: Sequence[int], atom_site: int
) -> tuple[list[int], dict[int, int]]:
    """Empty sites reachable from ``atom_site`` in BFS order, plus parent links.

    Neighbours are expanded in ascending id order, so parent links (and hence
    reconstructed paths) are deterministic.
    """
    parent = {atom_site: -1}
    order = []
    queue = [atom_site]
    for u in queue:
        for w in nbrs[u]:
            if occ[w] == EMPTY and w not in parent:
                parent[w] = u
                order.append(w)
                queue.append(w)
    return order, parent


def trace(parent: dict[int, int], dest: int) -> tuple[int, ...]:
    path = [dest]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def reachable_sites(g: TrapGraph, s: ArrayState | Sequence[int], atom_site: int) -> set[int]:
    occ = _occ(s)
    if occ[atom_site] == EMPTY:
        raise ValueError(f"site {atom_site} holds no atom")
    order, _ = bfs_from_atom(g.neighbors, occ, atom_site)
    return set(order)


def shortest_path(g: TrapGraph, s: ArrayState | Sequence[int], atom_site: int, dest: int) -> Move:
    occ = _occ(s)
    if occ[atom_site] == EMPTY:
        raise ValueError(f"site {atom_site} holds no atom")
    _, parent = bfs_from_atom(g.neighbors, occ, atom_site)
    if dest == atom_site or dest not in parent:
        raise NoPathError(f"no empty path from {atom_site} to {dest}")
    return Move(Species(occ[atom_site]), trace(parent, dest))


def check_move(g: TrapGraph, occ: Sequence[int], m: Move) -> str | None:
    """First violated legality condition for ``m`` in ``occ``, or ``None``."""
    path = m.path
    if occ[path[0]] != m.species:
        return "wrong-species" if occ[path[0]] else "empty-pick"
    for u, v in zip(path, path[1:]):
        if v not in g.neighbors[u]:
            return "not-adjacent"
    for v in path[1:-1]:
        if occ[v] != EMPTY:
            return "occupied-interior"
    if occ[path[-1]] != EMPTY:
        return "occupied-release"
    return None


def apply_move(g: TrapGraph, s: ArrayState, m: Move) -> ArrayState:
    reason = check_move(g, s.occupancy, m)
    if reason is not None:
        raise IllegalMoveError(f"{reason}: {m}")
    out = s.copy()
    out.occupancy[m.source] = EMPTY
    out.occupancy[m.dest] = int(m.species)
    return out


def nearest_outside_atom(
    g: TrapGraph, occ: Sequence[int], target_site: int, species: int
) -> tuple[int, int] | None:
    """``(atom_site, hops)`` of the nearest reservoir atom of ``species`` able to reach ``target_site``."""
    nbrs, targets = g.neighbors, g.targets
    dist = {target_site: 0}
    frontier = [target_site]
    d = 0
    while frontier:
        best = None
        nxt = []
        for u in frontier:
            for w in nbrs[u]:
                if w in dist:
                    continue
                o = occ[w]
                if o == EMPTY:
                    dist[w] = d + 1
                    nxt.append(w)
                elif o == species and not targets[w] and (best is None or w < best):
                    best = w
        if best is not None:
            return best, d + 1
        frontier = nxt
        d += 1
    return None


def closest_matched_atom(g: TrapGraph, s: ArrayState | Sequence[int], target_site: int) -> int | None:
    occ = _occ(s)
    species = g.targets[target_site]
    if not species or occ[target_site] != EMPTY:
        raise ValueError(f"site {target_site} is not an empty target site")
    hit = nearest_outside_atom(g, occ, target_site, species)
    return None if hit is None else hit[0]


def branch_factor(g: TrapGraph, s: ArrayState | Sequence[int]) -> int:
    """Number of (movable atom, reachable empty destination) pairs."""
    occ = _occ(s)
    labels, count = label_empty(g.neighbors, occ)
    sizes = [0] * count
    for c in labels:
        if c >= 0:
            sizes[c] += 1
    total = 0
    for i, v in enumerate(occ):
        if v:
            comps = {labels[w] for w in g.neighbors[i] if labels[w] >= 0}
            total += sum(sizes[c] for c in comps)
    return total
