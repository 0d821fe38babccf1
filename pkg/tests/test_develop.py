import math
import random

import pytest
from gmpy2 import mpq

from flatland import (
    DevelopedComplex,
    Rect,
    Vec,
    ball_embed,
    develop_disk,
    embedding_radius,
    embeds,
    er_compact,
    immerse,
    l_origami,
    plane,
    point_fiber,
    rect_union_normalize,
    square_torus,
    staircase,
    torus,
    trace,
)
from flatland.develop import (
    Embedded,
    Endpoint,
    HitPuncture,
    NoImmersion,
    NonTermination,
    Overlap,
    RadiusTooLarge,
    RegionTouchesPuncture,
)

from oracles import lattice_points_in_disk, lattice_points_in_rect, random_disk

H = mpq(1, 2)


def square(h):
    return DevelopedComplex.square_disk(mpq(h) if not isinstance(h, str) else mpq(h))


def same_point(S, a, b) -> bool:
    """``a`` and ``b`` (polygon, point) name the same point of ``S``."""
    return (b[0], Vec.of(*b[1])) in set(S.representations(a[0], Vec.of(*a[1])))


# -- trace ---------------------------------------------------------------------------------


def test_trace_closed_geodesic_on_torus():
    assert trace(square_torus(), (0, (H, H)), (1, 0), 1) == Endpoint(0, Vec(H, H))


def test_trace_into_the_cone_point_of_l():
    res = trace(l_origami(), (0, (H, H)), (1, 1), 2)
    assert isinstance(res, HitPuncture)
    assert res.distance2 == H
    assert res.point == Vec.of(1, 1)


def test_trace_in_the_plane():
    assert trace(plane(), (0, (0, 0)), (3, 4), 25) == Endpoint(0, Vec.of(3, 4))


def test_trace_cap():
    with pytest.raises(NonTermination):
        trace(square_torus(), (0, (H, H)), (1, 0), 400, cap=10)


# -- develop_disk ----------------------------------------------------------------------------


def test_torus_development_has_nine_squares():
    C = develop_disk(square_torus(), mpq(9, 16))
    corners = sorted(c.vertices[0] for c in C.cells)
    assert corners == sorted(Vec.of(i - H, j - H) for i in (-1, 0, 1) for j in (-1, 0, 1))
    assert C.cell(C.basepoint_cell).vertices[0] == Vec(-H, -H)


def test_plane_development_is_one_cell():
    for r2 in (1, 50):
        assert len(develop_disk(plane(), r2).cells) == 1


def test_l_development_records_four_cone_lifts():
    C = develop_disk(l_origami(), 1)
    assert sorted(C.singular_marks) == sorted(Vec(x, y) for x in (-H, H) for y in (-H, H))


def test_development_is_monotone_in_the_radius():
    for S in (square_torus(), l_origami(), staircase()):
        small = {(c.id, c.placement) for c in develop_disk(S, H).cells}
        big = {(c.id, c.placement) for c in develop_disk(S, 2).cells}
        assert small <= big


def test_cell_cap_from_environment(monkeypatch):
    monkeypatch.setenv("FLATLAND_CELL_CAP", "5")
    with pytest.raises(NonTermination):
        develop_disk(square_torus(), 4)


# -- immerse ------------------------------------------------------------------------------------


def test_square_immerses_in_torus():
    assert immerse(square("3/4"), square_torus())


def test_square_hits_cone_point_of_l():
    res = immerse(square(1), l_origami())
    assert isinstance(res, NoImmersion)
    assert res.witness == Vec(H, H)


def test_everything_immerses_in_the_plane():
    D = random_disk(random.Random(3))
    im = immerse(D, plane())
    assert im and all(p.offset == Vec.of(0, 0) for p in im.pieces)


def test_open_region_tolerates_boundary_cone_points():
    D = square(H)
    assert not immerse(D, l_origami())
    assert immerse(D, l_origami(), open_region=True)


@pytest.mark.parametrize("seed", range(10))
def test_forward_and_reverse_orders_agree(seed):
    rng = random.Random(seed)
    D = random_disk(rng, scale=mpq(1, 2))
    for S in (square_torus(), l_origami(), staircase()):
        a, b = immerse(D, S), immerse(D, S, order="reverse")
        assert bool(a) == bool(b)
        if a:
            assert a.placements == b.placements
        else:
            assert a == b


def test_composite_through_a_development():
    S = l_origami()
    C = develop_disk(S, 2)
    D = square("1/4")
    first = immerse(D, C)
    second = immerse(C, S)
    direct = immerse(D, S)
    assert first and second and direct
    for piece in first.pieces:
        for x in piece.region:
            via = second.apply(piece.target, x - piece.offset)
            assert same_point(S, via, direct.apply(piece.cell, x))


# -- embeds ------------------------------------------------------------------------------------------


def test_small_square_embeds_in_torus():
    assert isinstance(embeds(square("1/4"), square_torus()), Embedded)


def test_large_square_overlaps_itself():
    res = embeds(square("3/4"), square_torus())
    assert isinstance(res, Overlap)
    assert (res.x, res.y) == (Vec.of("-3/4", 0), Vec.of("1/4", 0))


def test_everything_embeds_in_the_plane():
    assert isinstance(embeds(square(3), plane()), Embedded)


def test_embeds_reports_no_immersion():
    assert isinstance(embeds(square(1), l_origami()), NoImmersion)


@pytest.mark.parametrize("h", ["1/8", "1/4", "3/8", "1/2", "5/8", "3/4", "1"])
@pytest.mark.parametrize("lattice", [((1, 0), (0, 1)), ((1, 0), (0, 2)), ((2, 0), (1, 1))])
def test_embeds_matches_lattice_overlap_oracle(h, lattice):
    """A closed square embeds in a torus iff no nonzero lattice vector
    carries it onto itself."""
    v1, v2 = lattice
    S = torus(v1, v2)
    h = mpq(h)
    box = Rect(Vec(-2 * h, -2 * h), Vec(2 * h, 2 * h))
    expected = lattice_points_in_rect(v1, v2, box) == [Vec.of(0, 0)]
    res = embeds(square(h), S)
    assert isinstance(res, Embedded) == expected
    if isinstance(res, Overlap):
        d = res.y - res.x
        assert d != Vec.of(0, 0)
        assert d in lattice_points_in_rect(v1, v2, box)


def test_overlap_witness_points_share_an_image():
    S = l_origami().with_basepoint((1, ("3/2", H)))
    D = DevelopedComplex.from_rect_union(rect_union_normalize([Rect.of("-1/4", -H, "1/4", H)]))
    res = embeds(D, S)
    assert isinstance(res, Overlap)
    assert res.y - res.x == Vec.of(0, 1)
    im = res.map
    a = im.apply(res.cells[0], res.x)
    b = im.apply(res.cells[1], res.y)
    assert same_point(im.target, a, b)


# -- fibers ----------------------------------------------------------------------------------------


def test_square_torus_fiber_is_the_lattice():
    fib = point_fiber(immerse(square("5/4"), square_torus()))
    assert sorted(fib.offsets) == sorted(Vec.of(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))


def test_tall_torus_fiber():
    fib = point_fiber(immerse(square("5/4"), torus((1, 0), (0, 2))))
    assert sorted(fib.offsets) == [Vec.of(-1, 0), Vec.of(0, 0), Vec.of(1, 0)]


def test_plane_fiber_is_the_origin():
    assert point_fiber(immerse(square(2), plane())).offsets == (Vec.of(0, 0),)


@pytest.mark.parametrize("lattice", [((1, 0), (0, 1)), ((1, 0), ("1/2", 1)), ((2, 0), (1, 3))])
def test_fiber_is_lattice_in_disk_and_closed_under_differences(lattice):
    v1, v2 = lattice
    S = torus(v1, v2)
    r2 = mpq(4)
    C = develop_disk(S, r2)
    fib = point_fiber(immerse(C, S)).within(r2)
    assert list(fib) == sorted(lattice_points_in_disk(v1, v2, r2),
                               key=lambda p: (p.norm2(), math.atan2(p.y, p.x) % (2 * math.pi)))
    lattice_set = set(lattice_points_in_disk(v1, v2, 4 * r2))
    for p in fib:
        for q in fib:
            assert p - q in lattice_set


def test_fiber_ignores_lifts_hidden_behind_cone_points():
    # L sheared by [[1,2],[0,1]] and rebased is the L again; its parallelogram
    # cells past the cone point hold a lift at (0,1) that no segment reaches
    from flatland import Mat2, basepoint_change, gl2_act
    from flatland.surface import MarkedSurface

    T = gl2_act(Mat2.of(1, 2, 0, 1), basepoint_change(MarkedSurface(l_origami(), (1, ("3/2", H)))))
    D = develop_disk(T, 2)
    fib = point_fiber(immerse(D, T))
    assert Vec.of(0, 1) in fib.offsets
    assert fib.within(2) == (Vec.of(0, 0),)
    S = l_origami()
    assert point_fiber(immerse(develop_disk(S, 2), S)).within(2) == (Vec.of(0, 0),)


def test_marked_fiber():
    S = square_torus()
    fib = point_fiber(immerse(square(1), S), (0, ("3/4", H)))
    assert sorted(fib.offsets) == sorted(Vec.of(x, y) for x in ("-3/4", "1/4") for y in (-1, 0, 1))


# -- embedding radius ----------------------------------------------------------------------------


def test_plane_radius_is_infinite():
    assert embedding_radius(plane()).value == math.inf


def test_torus_radius_binds_by_self_overlap():
    er = embedding_radius(square_torus())
    assert er.value == mpq(1, 4)
    assert er.event.kinds == ("self-overlap",)


def test_l_radius_is_a_tie():
    er = embedding_radius(l_origami())
    assert er.value == H
    assert set(er.event.kinds) == {"singularity", "self-overlap"}
    assert er.event.singularity.norm2() == H


def test_staircase_radius():
    assert embedding_radius(staircase()).value == H


def er_pair_lipschitz(a, b, d2) -> bool:
    """``(sqrt a - sqrt b)^2 <= d2`` decided exactly."""
    s = a + b - d2
    return s <= 0 or s * s <= 4 * a * b


@pytest.mark.parametrize("seed", range(6))
def test_embedding_radius_is_one_lipschitz(seed):
    rng = random.Random(seed)
    S = l_origami()
    pid = rng.randrange(3)
    P = S.polygon(pid)
    lo = P[0]

    def point():
        return lo + Vec(mpq(rng.randint(1, 15), 16), mpq(rng.randint(1, 15), 16))

    s, t = point(), point()
    a = embedding_radius(S, (pid, s)).value
    b = embedding_radius(S, (pid, t)).value
    assert er_pair_lipschitz(a, b, (s - t).norm2())


def test_ball_embedding_in_one_square():
    im = ball_embed(square_torus(), (0, (H, H)), mpq(1, 16))
    assert {p.target for p in im.pieces} == {0}
    assert im.apply(im.source.basepoint_cell, (0, 0)) == (0, Vec(H, H))
    assert im.apply(im.source.basepoint_cell, (mpq(1, 8), 0)) == (0, Vec(mpq(5, 8), H))


def test_ball_embedding_crosses_squares_without_cone_points():
    im = ball_embed(l_origami(), (0, (H, H)), mpq(1, 4))
    assert len(im.source.cells) == 5
    assert not im.source.singular_marks
    assert {p.target for p in im.pieces} == {0, 1, 2}


def test_ball_embedding_rejects_bad_radii():
    for eps2 in (0, mpq(1, 4)):
        with pytest.raises(RadiusTooLarge):
            ball_embed(square_torus(), (0, (H, H)), eps2)


def test_er_over_the_whole_torus_square():
    S = square_torus()
    assert er_compact(S, [(0, Rect.of(0, 0, 1, 1))]) == mpq(1, 4)


def test_er_over_a_point_region():
    assert er_compact(l_origami(), [(0, (H, H))]) == H


def test_er_over_a_region_of_l():
    assert er_compact(l_origami(), [(0, Rect.of("1/4", "1/4", "3/4", "3/4"))]) == mpq(1, 8)


def test_er_region_touching_cone_point():
    with pytest.raises(RegionTouchesPuncture):
        er_compact(l_origami(), [(0, Rect.of(H, H, 1, 1))])


def test_er_compact_in_the_plane():
    assert er_compact(plane(), [(0, Rect.of(0, 0, 1, 1))]) == math.inf


def test_er_compact_is_the_minimum_of_sampled_values():
    S = l_origami()
    region = Rect.of("1/4", "1/4", "3/4", "3/4")
    m = er_compact(S, [(0, region)])
    for i in range(5):
        for j in range(5):
            p = Vec(mpq(1, 4) + mpq(i, 8), mpq(1, 4) + mpq(j, 8))
            assert embedding_radius(S, (0, p)).value >= m
