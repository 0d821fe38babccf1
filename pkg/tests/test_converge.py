import random

import pytest
from gmpy2 import mpq

from flatland import (
    Vec,
    certify_convergence,
    cluster_at_radius,
    compactness_probe,
    l_origami,
    origami,
    square_torus,
    torus,
    torus_triangles,
)
from flatland.converge import (
    PrecheckFailed,
    SurfaceSequence,
    certify_convergence_marked,
    match_fibers,
    within_inner,
)
from flatland.io import parse_sequence
from flatland.surface import MarkedSurface

TENTH = mpq(1, 10)


def tall(n):
    return torus((1, 0), (0, 1 + mpq(1, n)))


TALL = SurfaceSequence(tall, "torus((1,0),(0,1+1/n))")


def test_tall_tori_certify_at_ten():
    rep = certify_convergence(TALL, square_torus(), 4, TENTH, (1, 50))
    assert rep.verdict == "CertifiedAtRadius" and rep.threshold == 10
    assert [c.n for c in rep.checks if not c.ok] == list(range(1, 10))
    assert bool(rep)


def test_alternating_sequence_is_refuted_at_two():
    seq = parse_sequence("builtin:alternating")
    rep = certify_convergence(seq, square_torus(), 4, TENTH, (1, 20))
    assert rep.verdict == "RefutedAtRadius"
    assert rep.refuted_at == 2 and rep.witness == Vec.of(0, 1)


def test_constant_sequence_certifies_at_start():
    seq = SurfaceSequence(lambda n: square_torus(), "constant")
    rep = certify_convergence(seq, square_torus(), 4, TENTH, (3, 8))
    assert rep.threshold == 3


def test_non_immersing_terms_refute():
    seq = SurfaceSequence(lambda n: l_origami(), "L")
    rep = certify_convergence(seq, square_torus(), 1, TENTH, (1, 4))
    assert rep.verdict == "RefutedAtRadius" and rep.checks[0].reason == "no immersion"


def test_runaway_development_is_inconclusive(monkeypatch):
    monkeypatch.setenv("FLATLAND_CELL_CAP", "4")
    rep = certify_convergence(TALL, square_torus(), 4, TENTH, (1, 3))
    assert rep.verdict == "Inconclusive" and not rep


def test_jobs_do_not_change_the_report():
    a = certify_convergence(TALL, square_torus(), 4, TENTH, (1, 16))
    b = certify_convergence(TALL, square_torus(), 4, TENTH, (1, 16), jobs=4)
    assert a == b


@pytest.mark.parametrize("delta", ["1/20", "1/10", "1/5", "1/3"])
def test_threshold_falls_as_delta_grows(delta):
    delta = mpq(delta)
    rep = certify_convergence(TALL, square_torus(), 4, delta, (1, 50))
    # (0, 1 + 1/n) is within delta of (0, 1) iff n >= 1/delta
    assert rep.threshold == max(1, -(-1 // delta))


def test_threshold_does_not_drop_with_radius():
    ns = [certify_convergence(TALL, square_torus(), r2, TENTH, (1, 40)).threshold for r2 in (1, 4, 9)]
    # at r^2 = 1 the point (0, 1+1/n) is outside the inner disk for small n
    assert ns == sorted(ns)


def test_marked_convergence():
    seq = parse_sequence("seq:marked-shift")
    limit = MarkedSurface(square_torus(), (0, ("1/2", "1/2")))
    assert certify_convergence_marked(seq, limit, 4, TENTH, (1, 30)).threshold == 10
    alt = parse_sequence("seq:marked-alternating")
    rep = certify_convergence_marked(alt, MarkedSurface(square_torus(), (0, ("1/4", "1/4"))),
                                     4, TENTH, (1, 10))
    assert rep.verdict == "RefutedAtRadius" and rep.refuted_at == 2


def test_fiber_matching_helpers():
    assert within_inner(Vec.of(0, 1), 4, TENTH)
    assert not within_inner(Vec.of(0, 2), 4, TENTH)
    m, w = match_fibers([Vec.of(0, 0), Vec.of(0, 1)], [Vec.of(0, 0), Vec.of(0, "11/10")], 4, TENTH)
    assert w is None and len(m) == 2
    m, w = match_fibers([Vec.of(0, 0), Vec.of(0, 1)], [Vec.of(0, 0)], 4, TENTH)
    assert w == Vec.of(0, 1)


# -- clustering ------------------------------------------------------------------------


def test_clusters_of_tori():
    rep = cluster_at_radius([square_torus(), torus_triangles(), torus((1, 0), (0, 2))], 4)
    assert rep.clusters == ((0, 1), (2,))
    assert rep.cluster_of(1) == 0


def test_single_surface_is_one_cluster():
    assert cluster_at_radius([l_origami()], 1).clusters == ((0,),)


def random_origami(rng, n):
    while True:
        h, v = list(range(n)), list(range(n))
        rng.shuffle(h)
        rng.shuffle(v)
        try:
            return origami(h, v)
        except ValueError:
            continue


def test_random_origamis_partition_consistently():
    rng = random.Random(7)
    surfaces = [random_origami(rng, 4) for _ in range(20)]
    small = cluster_at_radius(surfaces, 1)
    big = cluster_at_radius(surfaces, 2)
    seen = sorted(i for c in big.clusters for i in c)
    assert seen == list(range(20))
    # a larger radius can only split clusters
    for c in big.clusters:
        assert len({small.cluster_of(i) for i in c}) == 1


def test_clustering_with_threads_matches():
    rng = random.Random(8)
    surfaces = [random_origami(rng, 3) for _ in range(10)]
    assert cluster_at_radius(surfaces, 1).clusters == cluster_at_radius(surfaces, 1, jobs=3).clusters


# -- compactness probe ------------------------------------------------------------------


def test_torus_n_probe():
    seq = parse_sequence("seq:torus-n")
    rep = compactness_probe(seq, mpq(1, 16), 4, 20)
    assert rep.clusters.clusters == ((0,), (1,), tuple(range(2, 20)))
    assert rep.largest == tuple(range(3, 21))


def test_probe_prechecks_the_radius():
    seq = SurfaceSequence(lambda n: torus((1, 0), (0, mpq(1, n))), "thin")
    with pytest.raises(PrecheckFailed) as err:
        compactness_probe(seq, mpq(1, 16), 1, 5)
    assert err.value.n == 2
