from fractions import Fraction

from hypothesis import strategies as st

from toruslab.torus import Arc, Region


def dyadic(den=8):
    return st.integers(0, den - 1).map(lambda k: Fraction(k, den))


def arcs(den=8):
    return st.tuples(st.integers(0, den - 1), st.integers(1, den)).map(
        lambda t: Arc(Fraction(t[0], den), Fraction(t[1], den)))


def boxes(depth=2, den=8):
    return st.lists(arcs(den), min_size=depth, max_size=depth).map(lambda a: Region.box(*a))


def regions(depth=2, den=8, max_boxes=3):
    from toruslab.torus import region_union

    def build(bs):
        out = Region.empty(depth)
        for b in bs:
            out = region_union(out, b)
        return out

    return st.lists(boxes(depth, den), min_size=0, max_size=max_boxes).map(build)
