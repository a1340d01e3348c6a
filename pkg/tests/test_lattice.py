import itertools
import json
import math

import pytest

from hcoa.lattice import (
    Bitmap,
    InstanceFormatError,
    Pattern,
    Site,
    TrapGraph,
    apply_target_pattern,
    build_kagome,
    build_square,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    region_shape,
    save_instance,
    stamp_central_region,
)
from hcoa.species import Species
from hcoa.state import ArrayState


def assert_well_formed(g: TrapGraph):
    assert [s.id for s in g.sites] == list(range(g.n))
    for u, v in g.edges:
        assert u != v
        assert 0 <= u < g.n and 0 <= v < g.n
        assert v in g.neighbors[u] and u in g.neighbors[v]
    assert sum(len(x) for x in g.neighbors) == 2 * len(g.edges)


@pytest.mark.parametrize(
    "w,h,diag,n,e",
    [(2, 2, False, 4, 4), (2, 2, True, 4, 6), (3, 1, False, 3, 2), (1, 1, False, 1, 0), (3, 3, True, 9, 20)],
)
def test_square_counts(w, h, diag, n, e):
    g = build_square(w, h, diag)
    assert (g.n, len(g.edges)) == (n, e)
    assert_well_formed(g)
    assert all(t == 0 for t in g.targets)


def test_square_adjacency_matches_geometry():
    for diag in (False, True):
        g = build_square(5, 4, diag)
        limit = math.sqrt(2) + 1e-9 if diag else 1 + 1e-9
        expect = {(u, v) for u, v in itertools.combinations(range(g.n), 2) if g.distance(u, v) <= limit}
        assert set(g.edges) == expect


@pytest.mark.parametrize("dims", [(0, 3), (3, 0), (-1, 2)])
def test_zero_dimension_rejected(dims):
    with pytest.raises(ValueError):
        build_square(*dims)
    with pytest.raises(ValueError):
        build_kagome(*dims)


def test_kagome_single_cell_is_triangle():
    g = build_kagome(1, 1)
    assert g.n == 3
    assert set(g.edges) == {(0, 1), (0, 2), (1, 2)}


def test_kagome_two_cells():
    g = build_kagome(2, 1)
    assert g.n == 6
    # two triangles joined by the single bond between them
    assert len(g.edges) == 7
    assert_well_formed(g)


@pytest.mark.parametrize("cx,cy", [(1, 2), (2, 2), (3, 3), (4, 2), (5, 4)])
def test_kagome_bonds_are_unit_distance_pairs(cx, cy):
    g = build_kagome(cx, cy)
    assert_well_formed(g)
    expect = {
        (u, v) for u, v in itertools.combinations(range(g.n), 2) if abs(g.distance(u, v) - 1.0) < 1e-9
    }
    assert set(g.edges) == expect
    if cx >= 2 and cy >= 2:
        # coordination 4 in the bulk
        assert max(len(x) for x in g.neighbors) == 4


def _region(g):
    return {i for i in range(g.n) if g.targets[i]}


def test_zebra_10x10():
    g = apply_target_pattern(build_square(10, 10), Pattern.ZEBRA, 0.36)
    assert len(g.target_sites) == 36
    for i in g.target_sites:
        x, y = i % 10, i // 10
        assert 2 <= x <= 7 and 2 <= y <= 7
        assert g.targets[i] == (Species.A if (y - 2) % 2 == 0 else Species.B)


def test_checkerboard_10x10():
    g = apply_target_pattern(build_square(10, 10), Pattern.CHECKERBOARD, 0.36)
    assert len(g.target_sites) == 36
    for i in g.target_sites:
        r, c = i // 10 - 2, i % 10 - 2
        assert g.targets[i] == (Species.A if (r + c) % 2 == 0 else Species.B)


def test_zone3x3_10x10():
    g = apply_target_pattern(build_square(10, 10), Pattern.ZONE3X3, 0.36)
    for i in g.target_sites:
        r, c = i // 10 - 2, i % 10 - 2
        assert g.targets[i] == (Species.A if (r // 3 + c // 3) % 2 == 0 else Species.B)


def test_region_is_centered_biased_low():
    assert region_shape(10, 10, 0.36) == (6, 6)
    g = apply_target_pattern(build_square(9, 9), Pattern.ZEBRA, 0.36)
    xs = {i % 9 for i in g.target_sites}
    assert xs == set(range(1, 6)) or xs == set(range(2, 7))
    assert min(xs) == (9 - len(xs)) // 2


def test_bitmap_all_a_2x2_on_4x4():
    g = apply_target_pattern(build_square(4, 4), Bitmap.from_text("AA\nAA"), None)
    assert _region(g) == {5, 6, 9, 10}
    assert all(g.targets[i] == Species.A for i in g.target_sites)


def test_bitmap_verbatim_and_holes():
    bm = Bitmap.from_text("AB.\n.BA")
    g = apply_target_pattern(build_square(5, 4), bm, None)
    got = {(i % 5, i // 5): Species(g.targets[i]).name for i in g.target_sites}
    assert got == {(1, 1): "A", (2, 1): "B", (2, 2): "B", (3, 2): "A"}


def test_bitmap_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        apply_target_pattern(build_square(10, 10), Bitmap.from_text("AB\nBA"), 0.36)
    with pytest.raises(ValueError):
        apply_target_pattern(build_square(2, 2), Bitmap.from_text("AAA\nAAA\nAAA"), None)
    with pytest.raises(ValueError):
        Bitmap.from_text("AB\nA")


def test_pattern_on_non_grid_rejected():
    with pytest.raises(ValueError):
        apply_target_pattern(build_kagome(3, 3), Pattern.ZEBRA, 0.36)


def test_pattern_only_touches_region():
    base = build_square(8, 8)
    for p in Pattern:
        g = apply_target_pattern(base, p, 0.36)
        rw, rh = region_shape(8, 8, 0.36)
        assert len(g.target_sites) == rw * rh
        x0, y0 = (8 - rw) // 2, (8 - rh) // 2
        inside = {(y0 + r) * 8 + x0 + c for r in range(rh) for c in range(rw)}
        assert set(g.target_sites) == inside
        assert g.edges == base.edges


def test_stamp_central_region_kagome():
    g = stamp_central_region(build_kagome(6, 6), Pattern.ZEBRA, 0.36)
    assert len(g.target_sites) == math.ceil(0.36 * g.n)
    assert {g.targets[i] for i in g.target_sites} == {Species.A, Species.B}


def test_target_fraction_bounds():
    with pytest.raises(ValueError):
        region_shape(10, 10, 0.0)
    with pytest.raises(ValueError):
        region_shape(10, 10, 1.0)


def test_graph_rejects_bad_edges():
    sites = (Site(0, (0.0, 0.0)), Site(1, (1.0, 0.0)))
    with pytest.raises(ValueError):
        TrapGraph(sites, frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        TrapGraph(sites, frozenset({(0, 2)}))
    with pytest.raises(ValueError):
        TrapGraph((Site(0, (0.0, 0.0)), Site(1, (0.0, 0.0))), frozenset())
    with pytest.raises(ValueError):
        TrapGraph((Site(1, (0.0, 0.0)),), frozenset())


# -- instance files ------------------------------------------------------------


def _instance(tmp_path, data):
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(data))
    return p


def test_round_trip(tmp_path):
    g = apply_target_pattern(build_square(3, 3), Pattern.CHECKERBOARD, 0.36)
    s = ArrayState([0, 1, 2, 2, 0, 1, 1, 0, 2])
    p = tmp_path / "x.json"
    save_instance(g, s, p)
    g2, s2 = load_instance(p)
    assert g2 == g and s2 == s
    assert g2.targets == g.targets and g2.neighbors == g.neighbors
    save_instance(g2, s2, tmp_path / "y.json")
    assert (tmp_path / "x.json").read_bytes() == (tmp_path / "y.json").read_bytes()


def test_round_trip_kagome_positions_exact(tmp_path):
    g = stamp_central_region(build_kagome(3, 2), Pattern.ZEBRA, 0.4)
    s = ArrayState([i % 3 for i in range(g.n)])
    save_instance(g, s, tmp_path / "k.json")
    g2, s2 = load_instance(tmp_path / "k.json")
    assert [x.position for x in g2.sites] == [x.position for x in g.sites]
    assert g2 == g and s2 == s


def _base():
    g = build_square(2, 1)
    return instance_to_dict(g, ArrayState([1, 0]))


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d["edges"].append([1, 0]), "edges[1]"),
        (lambda d: d["edges"].append([0, 1]), "edges[1]"),
        (lambda d: d["edges"].append([0, 7]), "edges[1]"),
        (lambda d: d["edges"].append([1, 1]), "edges[1]"),
        (lambda d: d["sites"][1].update(id=5), "sites"),
        (lambda d: d["sites"][0].update(occupant="C"), "sites[0].occupant"),
        (lambda d: d["sites"][1].update(target=1), "sites[1].target"),
        (lambda d: d["sites"][0].pop("x"), "sites[0].x"),
        (lambda d: d.pop("edges"), "edges"),
    ],
)
def test_malformed_instances_name_the_field(tmp_path, mutate, field):
    d = _base()
    mutate(d)
    with pytest.raises(InstanceFormatError, match=field.replace("[", r"\[").replace("]", r"\]")):
        load_instance(_instance(tmp_path, d))


def test_occupant_on_nonexistent_site(tmp_path):
    d = _base()
    d["sites"].append({"id": 9, "x": 5.0, "y": 5.0, "target": None, "occupant": "A"})
    with pytest.raises(InstanceFormatError):
        load_instance(_instance(tmp_path, d))


def test_json_syntax_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"sites": [\n  {"id": 0,,}\n]}')
    with pytest.raises(InstanceFormatError, match="line 2"):
        load_instance(p)


def test_from_dict_requires_object():
    with pytest.raises(InstanceFormatError):
        instance_from_dict([1, 2])
