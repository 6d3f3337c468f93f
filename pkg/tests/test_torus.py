from fractions import Fraction as F

import pytest
from hypothesis import given

from toruslab.errors import ValidationError
from toruslab.torus import (
    Arc,
    Point,
    Region,
    circle_distance,
    region_complement,
    region_intersect,
    region_measure,
    region_subtract,
    region_union,
    torus_metric,
)

from strategies import regions


def box(*pairs):
    return Region.box(*(Arc(F(a), F(b) - F(a)) for a, b in pairs))


def test_intersection_of_overlapping_boxes():
    r = region_intersect(box((0, "1/2")), box(("1/4", "3/4")))
    assert r == box(("1/4", "1/2"))
    assert r.measure() == F(1, 4)


def test_wrapping_arc_intersection():
    wrap = Region.box(Arc(F(3, 4), F(1, 2)))
    r = region_intersect(wrap, box((0, "1/2")))
    assert r.measure() == F(1, 4)
    assert r.contains(Point((F(0),))) and r.contains(Point((F(1, 8),)))
    assert not r.contains(Point((F(1, 4),)))


def test_subtraction_and_disjoint_union():
    d = region_subtract(box((0, "1/2")), box(("1/4", "3/4")))
    assert d.measure() == F(1, 4)
    assert d.contains(Point((F(0),))) and not d.contains(Point((F(1, 4),)))
    u = region_union(box((0, "1/4")), box(("1/2", "3/4")))
    assert u.measure() == F(1, 2)


def test_figure_box_measure():
    assert box((0, "1/8"), (0, "1/4"), (0, "1/4")).measure() == F(1, 128)


def test_arc_validation():
    with pytest.raises(ValidationError):
        Arc(F(1), F(1, 2))
    with pytest.raises(ValidationError):
        Arc(F(0), F(0))


def test_metric_examples():
    zero = Point(())
    assert torus_metric(zero, Point((F(1, 2),)), 1)[0] == F(1, 4)
    lo, hi = torus_metric(zero, Point((F(1, 4), F(1, 4))), 2)
    assert lo == F(3, 16) and hi == lo + F(1, 4)
    assert circle_distance(F(1, 8), F(7, 8)) == F(1, 4)


@given(regions(), regions())
def test_inclusion_exclusion(a, b):
    assert region_measure(region_union(a, b)) == a.measure() + b.measure() - region_intersect(a, b).measure()


@given(regions())
def test_complement_partitions_torus(a):
    c = region_complement(a)
    assert a.measure() + c.measure() == 1
    assert region_intersect(a, c).measure() == 0


@given(regions(), regions())
def test_subtract_is_intersection_with_complement(a, b):
    assert region_subtract(a, b).measure() == region_intersect(a, region_complement(b)).measure()


@given(regions())
def test_json_roundtrip(a):
    assert Region.from_json(a.to_json()).measure() == a.measure()
