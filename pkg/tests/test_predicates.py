import json
import random

import pytest
from gmpy2 import mpq

from flatland import DevelopedComplex, Rect, Vec, square_torus, torus, torus_triangles
from flatland.io import certificate_from_dict, certificate_to_dict, dumps, set_from_dict, set_to_dict
from flatland.predicates import (
    Certificate,
    Disjoint,
    EMinus,
    EPlus,
    EmbedsSet,
    Immerses,
    MalformedSet,
    Minus,
    NotImmerses,
    NotSeparatedUpTo,
    Plus,
    Region,
    member,
    separating_certificate,
    verify_certificate,
)
from flatland.surface import MarkedSurface

from oracles import lattice_points_in_rect, random_disk, rects_meet_mod_lattice

D = DevelopedComplex.square_disk(mpq(5, 4))
K1 = Rect.square((0, 0), mpq(1, 8))
U01 = Region.ball((0, 1), mpq(1, 4))
SQUARE = ((1, 0), (0, 1))
TALL = ((1, 0), (0, 2))


def fiber_in(lattice, rect, open_):
    """Lattice points in the square ``D`` that lie in ``rect``."""
    pts = lattice_points_in_rect(*lattice, Rect.of("-5/4", "-5/4", "5/4", "5/4"))
    return [p for p in pts if (rect.contains_open(p) if open_ else rect.contains(p))]


CASES = [
    # (set, lattice, oracle)
    (Plus(D, U01), SQUARE, lambda: bool(fiber_in(SQUARE, U01.pieces[0][1], True))),
    (Plus(D, U01), TALL, lambda: bool(fiber_in(TALL, U01.pieces[0][1], True))),
    (Minus(D, U01.closure()), SQUARE, lambda: not fiber_in(SQUARE, U01.pieces[0][1], False)),
    (Minus(D, U01.closure()), TALL, lambda: not fiber_in(TALL, U01.pieces[0][1], False)),
    (Disjoint(D, Region.rects([K1]), Region.rects([K1.translate(Vec.of(1, 0))])), SQUARE,
     lambda: not rects_meet_mod_lattice(K1, K1.translate(Vec.of(1, 0)), *SQUARE)),
    (Disjoint(D, Region.rects([K1]), Region.rects([K1.translate(Vec.of("1/2", 0))])), SQUARE,
     lambda: not rects_meet_mod_lattice(K1, K1.translate(Vec.of("1/2", 0)), *SQUARE)),
]
EXPECTED = [True, False, False, True, False, True]


@pytest.mark.parametrize("i", range(len(CASES)))
def test_torus_truth_table(i):
    s, lattice, oracle = CASES[i]
    res = member(s, torus(*lattice))
    assert bool(res) == oracle() == EXPECTED[i]


def test_plus_reports_the_fiber_point():
    assert member(Plus(D, U01), square_torus()).fiber == (Vec.of(0, 1),)


def test_minus_on_tall_torus_sees_no_fiber_point_in_k():
    assert member(Minus(D, U01.closure()), torus(*TALL)).fiber == ()


def test_disjoint_witness_is_a_coinciding_pair():
    s = CASES[4][0]
    res = member(s, square_torus())
    x, y = res.witness
    assert y - x == Vec.of(1, 0)


def test_immerses_and_not_immerses():
    big = DevelopedComplex.square_disk(1)
    from flatland import l_origami

    assert member(Immerses(big), square_torus())
    assert not member(Immerses(big), l_origami())
    assert member(NotImmerses(big), l_origami())
    # the open square of half-width 1/2 misses the cone points on its boundary
    assert not member(NotImmerses(DevelopedComplex.square_disk(mpq(1, 2))), l_origami())


def test_embeds_set():
    assert member(EmbedsSet(DevelopedComplex.square_disk(mpq(1, 4))), square_torus())
    assert not member(EmbedsSet(DevelopedComplex.square_disk(mpq(3, 4))), square_torus())


def test_malformed_sets():
    with pytest.raises(MalformedSet):
        member(Plus(D, U01.closure()), square_torus())
    with pytest.raises(MalformedSet):
        member(Minus(D, U01), square_torus())
    with pytest.raises(MalformedSet):
        member(Plus(D, Region.ball((2, 2), mpq(1, 4))), square_torus())
    with pytest.raises(MalformedSet):
        member(EPlus(D, U01), square_torus())


@pytest.mark.parametrize("name", ["square", "tall", "sheared", "L", "cyl3", "origami4"])
def test_marked_sets_at_the_basepoint_agree(corpus, name):
    S = corpus[name]
    marked = MarkedSurface(S, S.basepoint)
    for c in (Vec.of(0, 0), Vec.of(0, 1), Vec.of(1, 0), Vec.of("1/2", "1/2")):
        U = Region.ball(c, mpq(1, 4))
        assert bool(member(EPlus(D, U), marked)) == bool(member(Plus(D, U), S))
        K = U.closure()
        assert bool(member(EMinus(D, K), marked)) == bool(member(Minus(D, K), S))


def test_marked_set_sees_the_mark():
    S = square_torus()
    marked = MarkedSurface(S, (0, ("3/4", "1/2")))
    U = Region.ball(("1/4", 0), mpq(1, 8))
    assert member(EPlus(D, U), marked)
    assert not member(Plus(D, U), S)


@pytest.mark.parametrize("seed", range(8))
def test_immersion_is_monotone_in_the_disk(corpus, seed):
    rng = random.Random(seed)
    big = random_disk(rng, scale=mpq(1, 2))
    sub = DevelopedComplex.square_disk(mpq(1, 16))
    for S in corpus.values():
        if member(Immerses(big), S):
            assert member(Immerses(sub), S)


# -- separation ---------------------------------------------------------------------


def test_separating_square_from_tall_torus():
    S, T = square_torus(), torus(*TALL)
    cert = separating_certificate(S, T, 4)
    assert isinstance(cert, Certificate)
    assert cert.reason == "PlusMinusPair"
    assert cert.point == Vec.of(0, 1)
    assert isinstance(cert.set_for_S, Plus) and isinstance(cert.set_for_T, Minus)
    assert verify_certificate(cert, S, T)
    assert not verify_certificate(cert, T, S)


def test_separation_by_immersion_failure():
    from flatland import l_origami

    cert = separating_certificate(square_torus(), l_origami(), 4)
    assert cert.reason in ("ImmersesNotImmerses", "PlusMinusPair")
    assert verify_certificate(cert, square_torus(), l_origami())


@pytest.mark.parametrize("cap", [1, 4, 9])
def test_same_torus_is_never_separated(cap):
    res = separating_certificate(square_torus(), torus_triangles(), cap)
    assert isinstance(res, NotSeparatedUpTo) and res.radius2 == cap
    assert not res


def test_identical_surfaces_are_not_separated():
    assert isinstance(separating_certificate(square_torus(), square_torus(), 4), NotSeparatedUpTo)


def test_set_and_certificate_json_round_trip():
    for s, _, _ in CASES:
        data = json.loads(dumps(set_to_dict(s)))
        back = set_from_dict(data)
        assert type(back) is type(s)
        assert bool(member(back, square_torus())) == bool(member(s, square_torus()))
    cert = separating_certificate(square_torus(), torus(*TALL), 4)
    back = certificate_from_dict(json.loads(dumps(certificate_to_dict(cert))))
    assert back.reason == cert.reason
    assert verify_certificate(back, square_torus(), torus(*TALL))
