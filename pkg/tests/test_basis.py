import math
from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

from toruslab.basis import (
    CubeSpec,
    ancestor_chain,
    cube_region,
    decompose,
    dyadic_cubes,
    fundamental_domain,
    halved_coordinate,
    locate,
    nonfree_count,
    parent,
    side_exponents,
    side_lengths,
    subgroup_elements,
)
from toruslab.torus import Arc, Box, Point, region_intersect


def sides(m):
    return [a.length for a in fundamental_domain(m).arcs]


def test_fundamental_domains():
    assert sides(7) == [F(1, 8), F(1, 4), F(1, 4)]
    assert sides(5) == [F(1, 4), F(1, 4), F(1, 2)]
    assert fundamental_domain(0) == Box(())


@given(st.integers(0, 400))
def test_sizelevel_decomposition(m):
    n, j = decompose(m)
    assert m == n * n + j and (m == 0 or 1 <= j <= 2 * n + 1)
    assert nonfree_count(m) == (n + 1 if m else 0)
    assert math.prod(side_lengths(m)) == F(1, 2 ** m)


def test_halved_coordinate_examples():
    assert [halved_coordinate(m) for m in (1, 3, 7)] == [1, 1, 1]
    # halving the recorded coordinate of V_{m-1} gives V_m
    for m in range(1, 50):
        prev = list(side_exponents(m - 1)) + [0] * (nonfree_count(m) - nonfree_count(m - 1))
        prev[halved_coordinate(m) - 1] += 1
        assert tuple(prev) == side_exponents(m)


def test_subgroups():
    assert {p.coords for p in subgroup_elements(1)} == {(F(0),), (F(1, 2),)}
    assert len(subgroup_elements(2)) == 4
    assert {p.coords for p in subgroup_elements(2)} == {(a, b) for a in (0, F(1, 2)) for b in (0, F(1, 2))}


def test_locate_examples():
    assert locate(Point((F(3, 10), F(3, 5))), 2).translation == (0, F(1, 2))
    assert locate(Point((F(3, 10), F(3, 5), F(1, 5))), 5).translation == (F(1, 4), F(1, 2), 0)


def test_cube_regions_and_wrap():
    v2 = CubeSpec(2, (0, 0))
    assert cube_region(v2).measure() == F(1, 4)
    shifted = CubeSpec(2, (F(3, 4), 0))
    assert not shifted.dyadic
    assert cube_region(shifted).contains(Point((F(7, 8), F(1, 4))))
    assert cube_region(shifted).contains(Point((F(1, 8), F(1, 4))))
    assert cube_region(shifted).measure() == F(1, 4)


def test_parent_of_level_two_cell():
    p = parent(CubeSpec(2, (0, F(1, 2))))
    assert p.m == 1 and p.translation == (0,)
    assert [c.m for c in ancestor_chain(CubeSpec(4, (F(1, 4), F(1, 2))))] == [4, 3, 2, 1, 0]


@given(st.integers(1, 30), st.tuples(*[st.fractions(0, 1).filter(lambda x: x < 1)] * 6))
def test_locate_nests_in_parent(m, coords):
    x = Point(coords)
    c = locate(x, m)
    assert cube_region(c).contains(x)
    assert parent(c) == locate(x, m - 1)
    assert region_intersect(cube_region(c), cube_region(parent(c))).measure() == cube_region(c).measure()


def test_dyadic_cells_are_disjoint_small_levels():
    for m in range(6):
        cells = [cube_region(c) for c in dyadic_cubes(m)]
        assert sum(c.measure() for c in cells) == 1
        for i in range(len(cells)):
            for k in range(i + 1, len(cells)):
                assert region_intersect(cells[i], cells[k]).is_empty()


def test_cubespec_json():
    c = CubeSpec(7, (F(1, 8), F(1, 4), F(3, 4)))
    assert CubeSpec.from_json(c.to_json()) == c
    assert c.to_json()["translation"][0] == [1, 8]
