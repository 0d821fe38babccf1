import random

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from flatland import (
    SurfacePresentation,
    builtin,
    develop_disk,
    l_origami,
    origami,
    plane,
    staircase,
    torus,
    validate,
    vertex_links,
)
from flatland.families import BadParams, UnknownName
from flatland.geometry import Vec
from flatland.surface import (
    InvalidPresentation,
    MarkAtPuncture,
    MarkedSurface,
    euler_characteristic,
    total_angle_turns,
)
from flatland.transform import basepoint_change

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
CENTER = (0, ("1/2", "1/2"))


def square_with(gluings):
    return SurfacePresentation({0: SQUARE}, gluings, CENTER)


def test_square_torus_is_valid():
    assert validate(square_with([((0, 0), (0, 2)), ((0, 1), (0, 3))])).ok


def test_left_glued_to_top_is_not_parallel():
    report = validate(square_with([((0, 3), (0, 2)), ((0, 0), (0, 1))]))
    assert "paired edges not parallel" in report.kinds()


def test_single_gluing_leaves_two_unpaired_edges():
    report = validate(square_with([((0, 1), (0, 3))]))
    assert report.kinds().count("unpaired edge") == 2


def test_length_mismatch_and_disconnection():
    polys = {0: SQUARE, 1: [(0, 0), (2, 0), (2, 1), (0, 1)]}
    s = SurfacePresentation(polys, [((0, 0), (1, 2)), ((0, 1), (0, 3)), ((1, 1), (1, 3)),
                                    ((0, 2), (1, 0))], CENTER)
    assert "length mismatch" in validate(s).kinds()
    apart = SurfacePresentation({0: SQUARE, 1: SQUARE},
                                [((0, 0), (0, 2)), ((0, 1), (0, 3)),
                                 ((1, 0), (1, 2)), ((1, 1), (1, 3))], CENTER)
    assert validate(apart).kinds() == ["disconnected"]


def test_basepoint_at_cone_point_rejected():
    L = l_origami()
    assert "basepoint in singular class" in validate(L.with_basepoint((0, (0, 0)))).kinds()


def test_non_convex_polygon_reported():
    s = SurfacePresentation({0: [(0, 0), (2, 0), (1, "1/4"), (1, 1)]}, [], (0, ("1/2", "1/4")))
    assert "non-convex polygon" in validate(s).kinds()


@given(st.dictionaries(st.integers(-1, 3), st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
                                                      max_size=5), max_size=3),
       st.lists(st.tuples(st.tuples(st.integers(-1, 3), st.integers(-1, 5)),
                          st.tuples(st.integers(-1, 3), st.integers(-1, 5))), max_size=6),
       st.tuples(st.integers(-1, 3), st.tuples(st.integers(-2, 2), st.integers(-2, 2))))
def test_validate_never_raises(polys, gluings, base):
    report = validate(SurfacePresentation(polys, gluings, base))
    assert isinstance(report.ok, bool)


# -- vertex classes ---------------------------------------------------------------------


def test_square_torus_has_one_regular_class():
    links = vertex_links(torus())
    assert len(links) == 1 and links[0].cone_order == 1


def test_l_origami_has_one_class_of_angle_six_pi():
    links = vertex_links(l_origami())
    assert [r.cone_order for r in links] == [3]
    assert len(links[0].corners) == 12


def test_stacked_squares_torus():
    # a torus of n squares has V = E - F = n vertex classes, all regular
    s = origami((0, 1), (1, 0))
    assert [r.cone_order for r in vertex_links(s)] == [1, 1]


def test_vertex_links_requires_valid_input():
    with pytest.raises(InvalidPresentation):
        vertex_links(square_with([((0, 1), (0, 3))]))


def random_origami(rng, n):
    while True:
        h = list(range(n))
        v = list(range(n))
        rng.shuffle(h)
        rng.shuffle(v)
        try:
            return origami(h, v)
        except BadParams:
            continue


@pytest.mark.parametrize("seed", range(12))
def test_gauss_bonnet_and_corner_partition(seed):
    rng = random.Random(seed)
    S = random_origami(rng, rng.randint(1, 7))
    links = vertex_links(S)
    corners = [c for r in links for c in r.corners]
    assert sorted(corners) == sorted((p, i) for p in S.polygons for i in range(4))
    assert sum(r.cone_order for r in links) == total_angle_turns(S)
    assert sum(r.cone_order - 1 for r in links) == -euler_characteristic(S)


@pytest.mark.parametrize("seed", range(8))
def test_origami_counts_and_integer_translations(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(1, 8)
    S = random_origami(rng, n)
    assert len(S.polygons) == n
    assert len(S.gluings()) == 2 * n
    for (p, e), _ in S.gluings():
        t = S.edge_shift(p, e)
        assert t.x.denominator == 1 and t.y.denominator == 1


def test_triangulated_torus_gauss_bonnet():
    S = builtin("torus-triangles")
    assert sum(r.cone_order - 1 for r in vertex_links(S)) == -euler_characteristic(S) == 0


# -- builtins ------------------------------------------------------------------------------


def test_torus_builtin():
    S = torus((1, 0), (0, 1))
    assert len(S.polygons) == 1 and len(S.gluings()) == 2
    assert S.basepoint == (0, Vec.of("1/2", "1/2"))


def test_three_square_cylinder():
    S = origami("(1 2 3)", "()")
    assert validate(S).ok
    assert [r.cone_order for r in vertex_links(S)] == [1, 1, 1]


def test_builtin_errors():
    with pytest.raises(BadParams):
        torus((1, 0), (2, 0))
    with pytest.raises(BadParams):
        origami((0, 1), (0, 1))
    with pytest.raises(UnknownName):
        builtin("klein")


def test_plane_has_no_vertices_and_always_develops():
    P = plane()
    for r2 in (1, 100, mpq(1, 7)):
        C = develop_disk(P, r2)
        assert len(C.cells) == 1 and not C.singular_marks
    assert P.representations(0, (5, 7)) == [(0, Vec.of(5, 7))]


def test_staircase_provider_is_deterministic():
    a, b = staircase(), staircase()
    assert a == b
    for i in range(-6, 7):
        for e in range(4):
            assert a.opposite(i, e) == b.opposite(i, e)
            q, f = a.opposite(i, e)
            assert a.opposite(q, f) == (i, e)


def test_staircase_truncation_is_an_origami():
    S = staircase(5)
    assert validate(S).ok and len(S.polygons) == 5


def test_mark_at_puncture_rejected():
    with pytest.raises(MarkAtPuncture):
        basepoint_change(MarkedSurface(l_origami(), (0, (1, 1))))
