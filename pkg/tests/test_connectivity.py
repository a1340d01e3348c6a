import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcoa.connectivity import (
    atom_partition_number,
    delta_C,
    empty_components,
    empty_site_partition_number,
    partition_numbers,
)
from hcoa.lattice import build_square
from hcoa.species import EMPTY
from hcoa.state import ArrayState
from oracles import component_count, flood, naive_atom_partition, naive_site_partition, random_graph, random_occ


def test_examples_components():
    g = build_square(3, 1)
    assert empty_components(g, ArrayState([0, 0, 0])).count == 1
    assert empty_components(g, ArrayState([1, 2, 1])).count == 0
    lab = empty_components(g, ArrayState([0, 1, 0]))
    assert lab.count == 2
    assert lab.component_of[1] == -1 and lab.component_of[0] != lab.component_of[2]
    assert lab.members(lab.component_of[0]) == [0]


def test_examples_site_partition():
    g = build_square(3, 1)
    s = ArrayState([0, 0, 0])
    assert empty_site_partition_number(g, s, 1) == 1
    assert empty_site_partition_number(g, s, 0) == 0
    assert empty_site_partition_number(g, ArrayState([1, 0, 1]), 1) == 0
    with pytest.raises(ValueError):
        empty_site_partition_number(g, ArrayState([1, 0, 0]), 0)


def test_star_centre_splits_into_k():
    g = build_square(3, 3)
    # plus shape of empties around the centre
    occ = [1, 0, 1, 0, 0, 0, 1, 0, 1]
    assert empty_site_partition_number(g, occ, 4) == 3


def test_examples_atom_partition():
    g = build_square(3, 1)
    assert atom_partition_number(g, [0, 1, 0], 1) == 1
    assert atom_partition_number(g, [1, 2, 1], 1) is None
    g2 = build_square(2, 2)
    # atom at 0 touches empties 1 and 2, joined through 3
    assert atom_partition_number(g2, [1, 0, 0, 0], 0) == 0
    with pytest.raises(ValueError):
        atom_partition_number(g, [0, 0, 0], 1)


def test_delta_c_examples():
    g = build_square(4, 1)
    # atom bridges two empties; moving it to the corridor end keeps one split
    assert delta_C(g, [0, 1, 0, 0], 1, 3) == 1
    # atom at the closed end of a corridor travels to the far end: no change
    assert delta_C(g, [1, 0, 0, 0], 0, 3) == 0
    # a single step leaves its old site cut off behind it
    assert delta_C(g, [1, 0, 0, 0], 0, 1) == -1
    assert component_count(g, [0, 1, 0, 0]) - component_count(g, [1, 0, 0, 0]) == 1
    with pytest.raises(ValueError):
        delta_C(g, [1, 2, 0, 0], 0, 2)
    with pytest.raises(ValueError):
        delta_C(g, [0, 1, 1, 0], 1, 3)
    with pytest.raises(ValueError):
        delta_C(g, [0, 1, 0, 1], 1, 3)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.5), st.floats(0.0, 0.9), st.integers(0, 2**32 - 1))
def test_partition_numbers_match_recount(n, p, fill, seed):
    rng = random.Random(seed)
    g = random_graph(rng, n, p)
    occ = random_occ(rng, n, fill)
    table = partition_numbers(g, occ)
    assert set(table) == {i for i in range(n) if occ[i] == EMPTY}
    for i in range(n):
        if occ[i] == EMPTY:
            assert table[i] == naive_site_partition(g, occ, i)
            assert empty_site_partition_number(g, occ, i) == table[i]
        else:
            got = atom_partition_number(g, occ, i)
            assert got == naive_atom_partition(g, occ, i)
            if got is not None:
                assert got <= len(g.neighbors[i]) - 1


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_delta_c_identity_exhaustive(w, h, seed):
    rng = random.Random(seed)
    g = build_square(w, h)
    occ = random_occ(rng, g.n)
    before = component_count(g, occ)
    for a in range(g.n):
        if occ[a] == EMPTY or not any(occ[x] == EMPTY for x in g.neighbors[a]):
            continue
        opened = list(occ)
        opened[a] = EMPTY
        for dest in flood(g, opened, a) - {a}:
            after = list(opened)
            after[dest] = occ[a]
            assert delta_C(g, occ, a, dest) == before - component_count(g, after)


def test_labeling_matches_flood_fill(rng):
    g = build_square(7, 7)
    for _ in range(30):
        occ = random_occ(rng, g.n)
        lab = empty_components(g, occ)
        for i in range(g.n):
            if occ[i] == EMPTY:
                same = {j for j in range(g.n) if lab.component_of[j] == lab.component_of[i]}
                assert same == flood(g, occ, i)
        assert lab.count == component_count(g, occ)
