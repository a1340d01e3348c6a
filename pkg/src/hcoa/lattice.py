"""Trap graphs: builders, target-pattern stamping and instance files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from .species import EMPTY, Species

if TYPE_CHECKING:
    from .state import ArrayState


class InstanceFormatError(ValueError):
    """Raised for malformed instance files; the message names the offending field."""


@dataclass(frozen=True)
class Site:
    id: int
    position: tuple[float, float]
    target: Species | None = None


@dataclass(frozen=True, eq=False)
class TrapGraph:
    """Immutable trap layout.

    ``edges`` holds unordered pairs normalised to ``(low, high)``. Neighbour
    tuples are sorted so that every traversal over them is deterministic.
    """

    sites: tuple[Site, ...]
    edges: frozenset[tuple[int, int]]
    neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    targets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.sites)
        for i, site in enumerate(self.sites):
            if site.id != i:
                raise ValueError(f"site ids must be dense 0..n-1, got {site.id} at index {i}")
        if len({s.position for s in self.sites}) != n:
            raise ValueError("site positions must be distinct")
        adj: list[list[int]] = [[] for _ in range(n)]
        normalised = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on site {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references a missing site")
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in normalised:
                continue
            normalised.add((a, b))
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "edges", frozenset(normalised))
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(x)) for x in adj))
        object.__setattr__(
            self, "targets", tuple(0 if s.target is None else int(s.target) for s in self.sites)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrapGraph):
            return NotImplemented
        return self.sites == other.sites and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.sites, self.edges))

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def target_sites(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.targets) if t)

    @cached_property
    def grid_shape(self) -> tuple[int, int] | None:
        """``(width, height)`` if sites are laid out as a row-major integer grid."""
        if not self.sites:
            return None
        xs = [s.position[0] for s in self.sites]
        width = 1
        while width < len(xs) and xs[width] != 0:
            width += 1
        if self.n % width:
            return None
        for s in self.sites:
            if s.position != (float(s.id % width), float(s.id // width)):
                return None
        return width, self.n // width

    def with_targets(self, labels: Sequence[Species | None]) -> "TrapGraph":
        if len(labels) != self.n:
            raise ValueError("one label per site required")
        sites = tuple(Site(s.id, s.position, t) for s, t in zip(self.sites, labels))
        return TrapGraph(sites, self.edges)

    def distance(self, u: int, v: int) -> float:
        (x0, y0), (x1, y1) = self.sites[u].position, self.sites[v].position
        return math.hypot(x1 - x0, y1 - y0)


def _require_positive(**dims: int) -> None:
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")


def build_square(width: int, height: int, diagonal: bool = False) -> TrapGraph:
    """Square lattice with 4-adjacency, or 8-adjacency when ``diagonal``."""
    _require_positive(width=width, height=height)
    sites = tuple(Site(y * width + x, (float(x), float(y))) for y in range(height) for x in range(width))
    edges = set()
    for y in range(height):
        for x in range(width):
            i = y * width + x
            if x + 1 < width:
                edges.add((i, i + 1))
            if y + 1 < height:
                edges.add((i, i + width))
                if diagonal:
                    if x + 1 < width:
                        edges.add((i, i + width + 1))
                    if x > 0:
                        edges.add((i, i + width - 1))
    return TrapGraph(sites, frozenset(edges))


_SQRT3 = math.sqrt(3.0)
_KAGOME_BASIS = ((0.0, 0.0), (1.0, 0.0), (0.5, _SQRT3 / 2))


def build_kagome(cells_x: int, cells_y: int) -> TrapGraph:
    """Kagome lattice on a ``cells_x`` by ``cells_y`` patch, open boundary.

    Unit cell: lattice vectors (2, 0) and (1, sqrt 3) with three basis sites
    forming an up-triangle; all bonds have unit length.
    """
    _require_positive(cells_x=cells_x, cells_y=cells_y)

    def sid(i: int, j: int, b: int) -> int:
        return 3 * (j * cells_x + i) + b

    sites = []
    for j in range(cells_y):
        for i in range(cells_x):
            ox, oy = 2.0 * i + j, _SQRT3 * j
            for b, (bx, by) in enumerate(_KAGOME_BASIS):
                sites.append(Site(sid(i, j, b), (ox + bx, oy + by)))
    edges = set()
    for j in range(cells_y):
        for i in range(cells_x):
            s0, s1, s2 = sid(i, j, 0), sid(i, j, 1), sid(i, j, 2)
            edges.update({(s0, s1), (s0, s2), (s1, s2)})
            if i + 1 < cells_x:
                edges.add((s1, sid(i + 1, j, 0)))
            if j + 1 < cells_y:
                edges.add((s2, sid(i, j + 1, 0)))
                if i > 0:
                    edges.add((s2, sid(i - 1, j + 1, 1)))
    return TrapGraph(tuple(sites), frozenset(edges))


class Pattern(Enum):
    ZEBRA = "zebra"
    CHECKERBOARD = "checker"
    ZONE3X3 = "zone3x3"


@dataclass(frozen=True)
class Bitmap:
    """User-drawn target labels; ``rows[r][c]`` labels region row ``r``, column ``c``.

    ``None`` cells are left as non-target, which allows non-rectangular targets.
    """

    rows: tuple[tuple[Species | None, ...], ...]

    @classmethod
    def from_text(cls, text: str) -> "Bitmap":
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            row = []
            for ch in line:
                if ch in "aA":
                    row.append(Species.A)
                elif ch in "bB":
                    row.append(Species.B)
                elif ch in ".-_ 0":
                    row.append(None)
                else:
                    raise ValueError(f"bitmap character {ch!r} is not one of A, B, '.'")
            rows.append(tuple(row))
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("bitmap must be a non-empty rectangle")
        return cls(tuple(rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows[0]), len(self.rows)


PatternKind = Pattern | Bitmap


def _pattern_label(pattern: Pattern, r: int, c: int) -> Species:
    if pattern is Pattern.ZEBRA:
        even = r % 2 == 0
    elif pattern is Pattern.CHECKERBOARD:
        even = (r + c) % 2 == 0
    else:
        even = (r // 3 + c // 3) % 2 == 0
    return Species.A if even else Species.B


def region_shape(width: int, height: int, target_fraction: float) -> tuple[int, int]:
    """Centered-rectangle dimensions whose area best matches ``target_fraction``."""
    if not 0 < target_fraction < 1:
        raise ValueError(f"target_fraction must lie in (0, 1), got {target_fraction}")
    scale = math.sqrt(target_fraction)
    rw = min(width, max(1, round(width * scale)))
    rh = min(height, max(1, round(height * scale)))
    return rw, rh


def apply_target_pattern(
    g: TrapGraph, pattern: PatternKind, target_fraction: float | None = 0.36
) -> TrapGraph:
    """Label a centered rectangular target region of a square-grid graph.

    For :class:`Bitmap` the region takes the bitmap's dimensions; if
    ``target_fraction`` is also given, the two must agree.
    """
    shape = g.grid_shape
    if shape is None:
        raise ValueError("rectangular target patterns need a square-grid graph; see stamp_central_region")
    width, height = shape
    if isinstance(pattern, Bitmap):
        rw, rh = pattern.shape
        if target_fraction is not None and (rw, rh) != region_shape(width, height, target_fraction):
            raise ValueError(
                f"bitmap is {rw}x{rh} but target fraction {target_fraction} implies "
                f"{region_shape(width, height, target_fraction)}"
            )
        if rw > width or rh > height:
            raise ValueError("bitmap larger than the lattice")
    else:
        if target_fraction is None:
            raise ValueError("target_fraction required for tiled patterns")
        rw, rh = region_shape(width, height, target_fraction)
    x0, y0 = (width - rw) // 2, (height - rh) // 2
    labels: list[Species | None] = [None] * g.n
    for r in range(rh):
        for c in range(rw):
            i = (y0 + r) * width + (x0 + c)
            if isinstance(pattern, Bitmap):
                labels[i] = pattern.rows[r][c]
            else:
                labels[i] = _pattern_label(pattern, r, c)
    return g.with_targets(labels)


def stamp_central_region(g: TrapGraph, pattern: Pattern, target_fraction: float = 0.36) -> TrapGraph:
    """Target-pattern stamping for arbitrary geometries (kagome, irregular).

    Picks the ``ceil(target_fraction * n)`` sites nearest the layout centre and
    labels them by the pattern applied to their row rank (distinct y values)
    and column rank within the row.
    """
    if not 0 < target_fraction < 1:
        raise ValueError(f"target_fraction must lie in (0, 1), got {target_fraction}")
    k = math.ceil(target_fraction * g.n)
    xs = [s.position[0] for s in g.sites]
    ys = [s.position[1] for s in g.sites]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    order = sorted(range(g.n), key=lambda i: (max(abs(xs[i] - cx), abs(ys[i] - cy)), i))
    chosen = order[:k]
    row_keys = sorted({round(ys[i], 6) for i in chosen})
    row_rank = {y: r for r, y in enumerate(row_keys)}
    by_row: dict[int, list[int]] = {}
    for i in chosen:
        by_row.setdefault(row_rank[round(ys[i], 6)], []).append(i)
    labels: list[Species | None] = [None] * g.n
    for r, members in by_row.items():
        for c, i in enumerate(sorted(members, key=lambda i: (xs[i], i))):
            labels[i] = _pattern_label(pattern, r, c)
    return g.with_targets(labels)


# -- instance files -----------------------------------------------------------

_LABELS = {None: None, "A": Species.A, "B": Species.B}


def _label_out(code: int | Species | None) -> str | None:
    if not code:
        return None
    return Species(code).name


def instance_to_dict(g: TrapGraph, s: "ArrayState") -> dict:
    if len(s) != g.n:
        raise ValueError("state does not match graph size")
    return {
        "sites": [
            {
                "id": site.id,
                "x": site.position[0],
                "y": site.position[1],
                "target": _label_out(site.target),
                "occupant": _label_out(s.occupancy[site.id]),
            }
            for site in g.sites
        ],
        "edges": [list(e) for e in sorted(g.edges)],
    }


def instance_from_dict(data: object) -> tuple[TrapGraph, "ArrayState"]:
    from .state import ArrayState

    def fail(where: str, msg: str) -> InstanceFormatError:
        return InstanceFormatError(f"{where}: {msg}")

    if not isinstance(data, dict):
        raise fail("<root>", "expected an object")
    raw_sites = data.get("sites")
    raw_edges = data.get("edges")
    if not isinstance(raw_sites, list):
        raise fail("sites", "expected a list")
    if not isinstance(raw_edges, list):
        raise fail("edges", "expected a list")
    entries = {}
    for k, entry in enumerate(raw_sites):
        where = f"sites[{k}]"
        if not isinstance(entry, dict):
            raise fail(where, "expected an object")
        sid = entry.get("id")
        if not isinstance(sid, int) or isinstance(sid, bool):
            raise fail(f"{where}.id", "expected an integer")
        if sid in entries:
            raise fail(f"{where}.id", f"duplicate site id {sid}")
        for key in ("x", "y"):
            if not isinstance(entry.get(key), (int, float)) or isinstance(entry.get(key), bool):
                raise fail(f"{where}.{key}", "expected a number")
        for key in ("target", "occupant"):
            if entry.get(key) not in _LABELS:
                raise fail(f"{where}.{key}", f"expected 'A', 'B' or null, got {entry.get(key)!r}")
        entries[sid] = entry
    n = len(entries)
    if sorted(entries) != list(range(n)):
        missing = sorted(set(range(n)) - set(entries))
        raise fail("sites", f"ids must be dense 0..{n - 1}; missing {missing[:5]}")
    seen = set()
    for k, pair in enumerate(raw_edges):
        where = f"edges[{k}]"
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair)
        ):
            raise fail(where, "expected a pair of site ids")
        u, v = pair
        if u == v:
            raise fail(where, f"self-loop on site {u}")
        if u not in entries or v not in entries:
            raise fail(where, f"references a nonexistent site id in {pair}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise fail(where, f"pair {pair} listed more than once (edges are unordered, list each once)")
        seen.add(key)
    sites = []
    occupancy = []
    for sid in range(n):
        e = entries[sid]
        sites.append(Site(sid, (float(e["x"]), float(e["y"])), _LABELS[e["target"]]))
        occ = _LABELS[e["occupant"]]
        occupancy.append(EMPTY if occ is None else int(occ))
    try:
        g = TrapGraph(tuple(sites), frozenset(seen))
    except ValueError as exc:
        raise fail("sites", str(exc)) from None
    return g, ArrayState(occupancy)


def save_instance(g: TrapGraph, s: "ArrayState", path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(g, s), indent=None, separators=(",", ":")) + "\n")


def load_instance(path: str | Path) -> tuple[TrapGraph, "ArrayState"]:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return instance_from_dict(data)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None

