"""Finite-radius evidence for convergence of surface sequences, clustering by
isomorphism at a radius, and compactness probes."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import networkx as nx

from .develop import NonTermination, develop_disk, embedding_radius, immerse, point_fiber, polar_key
from .geometry import Vec, dist2, rational
from .surface import MarkedSurface
from .transform import _Developed, _iso


@dataclass(frozen=True)
class SurfaceSequence:
    generator: Callable[[int], object]
    description: str = ""

    def __call__(self, n: int):
        return self.generator(n)


@dataclass(frozen=True)
class TermCheck:
    n: int
    ok: bool
    witness: Optional[Vec] = None
    reason: str = ""
    matching: tuple = ()  # pairs (limit point, term point)


@dataclass(frozen=True)
class ConvergenceReport:
    radius2: object
    delta: object
    verdict: str  # CertifiedAtRadius, RefutedAtRadius or Inconclusive
    threshold: Optional[int] = None
    refuted_at: Optional[int] = None
    witness: Optional[Vec] = None
    checks: tuple = field(default=(), repr=False)

    def __bool__(self):
        return self.verdict == "CertifiedAtRadius"


def within_inner(x, r2, delta) -> bool:
    """``|x| <= r - delta`` decided on squares: ``2 delta |x| <= r^2 - delta^2 - |x|^2``."""
    n2 = x.norm2()
    rhs = r2 - delta * delta - n2
    return rhs >= 0 and 4 * delta * delta * n2 <= rhs * rhs


def _one_sided(inner, others, delta2):
    """Match every point of ``inner`` to a distinct point of ``others`` within
    ``delta``.  Returns ``(matching, first unmatched point or None)``."""
    if not inner:
        return (), None
    g = nx.Graph()
    left = [("a", i) for i in range(len(inner))]
    g.add_nodes_from(left)
    g.add_nodes_from(("b", j) for j in range(len(others)))
    for i, x in enumerate(inner):
        for j, y in enumerate(others):
            if dist2(x, y) <= delta2:
                g.add_edge(("a", i), ("b", j))
    m = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    unmatched = [inner[i] for i in range(len(inner)) if ("a", i) not in m]
    if unmatched:
        return (), min(unmatched, key=polar_key)
    return tuple((inner[i], others[m[("a", i)][1]]) for i in range(len(inner))), None


def match_fibers(limit_pts, term_pts, r2, delta):
    """Both conditions at scale ``(r, delta)``: every point within ``r - delta``
    on either side has a partner within ``delta`` on the other.

    Returns ``(matching, witness)``; the witness is an unmatched point, limit
    side first.
    """
    delta2 = delta * delta
    limit_pts = sorted(limit_pts, key=polar_key)
    term_pts = sorted(term_pts, key=polar_key)
    a = [x for x in limit_pts if within_inner(x, r2, delta)]
    b = [x for x in term_pts if within_inner(x, r2, delta)]
    m1, w1 = _one_sided(a, term_pts, delta2)
    if w1 is not None:
        return (), w1
    m2, w2 = _one_sided(b, limit_pts, delta2)
    if w2 is not None:
        return (), w2
    return m1, None


def _verdict(checks, n_range, r2, delta) -> ConvergenceReport:
    n0, n1 = n_range
    if any(c.reason == "non-termination" for c in checks):
        return ConvergenceReport(r2, delta, "Inconclusive", checks=tuple(checks))
    failing = [c for c in checks if not c.ok]
    if not failing:
        return ConvergenceReport(r2, delta, "CertifiedAtRadius", n0, checks=tuple(checks))
    last = max(c.n for c in failing)
    # a tail at least half the range long must be clean to certify
    if last < (n0 + n1) // 2 + 1 and last < n1:
        return ConvergenceReport(r2, delta, "CertifiedAtRadius", last + 1, checks=tuple(checks))
    first = failing[0]
    return ConvergenceReport(r2, delta, "RefutedAtRadius", None, first.n, first.witness,
                             tuple(checks))


def _check_term(n, S_n, D, limit_fiber, r2, delta, mark=None) -> TermCheck:
    try:
        im = immerse(D, S_n.surface if mark is not None else S_n)
    except NonTermination:
        return TermCheck(n, False, None, "non-termination")
    if not im:
        return TermCheck(n, False, im.witness, "no immersion")
    fiber = list(point_fiber(im).visible())
    matching, w = match_fibers(limit_fiber, fiber, r2, delta)
    if w is not None:
        return TermCheck(n, False, w, "fiber mismatch")
    if mark is not None:
        lifts = point_fiber(im, S_n.mark).visible()
        if not any(dist2(x, mark) <= delta * delta for x in lifts):
            return TermCheck(n, False, mark, "mark mismatch")
    return TermCheck(n, True, None, "", matching)


def _run(seq, limit_surface, r2, delta, n_range, jobs, mark_of_limit=None):
    r2, delta = rational(r2), rational(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    n0, n1 = n_range
    try:
        D = develop_disk(limit_surface, r2)
    except NonTermination:
        return ConvergenceReport(r2, delta, "Inconclusive")
    im = immerse(D, limit_surface)
    limit_fiber = list(point_fiber(im).visible())
    mark = None
    if mark_of_limit is not None:
        lifts = point_fiber(im, mark_of_limit).visible()
        mark = min(lifts, key=polar_key)

    def work(n):
        return _check_term(n, seq(n), D, limit_fiber, r2, delta, mark)

    checks = _map(work, range(n0, n1 + 1), jobs)
    return _verdict(checks, n_range, r2, delta)


def certify_convergence(seq, limit, r2, delta, n_range, jobs: int = 1) -> ConvergenceReport:
    """Check, for each ``n`` in the range, that the closed ``r``-disk of the
    limit's development immerses in ``S_n`` and that basepoint fibers match
    within ``delta``.

    Certified with threshold ``N`` when every failure lies in the first half
    of the range (``N`` is one past the last failure); refuted at the first
    failure otherwise.
    """
    return _run(seq, limit, r2, delta, n_range, jobs)


def certify_convergence_marked(seq, limit: MarkedSurface, r2, delta, n_range,
                               jobs: int = 1) -> ConvergenceReport:
    """As :func:`certify_convergence`, and a lift of each mark must lie within
    ``delta`` of the lift of the limit mark nearest the basepoint."""
    return _run(seq, limit.surface, r2, delta, n_range, jobs, limit.mark)


# -- clustering ---------------------------------------------------------------------


@dataclass(frozen=True)
class ClusterReport:
    clusters: tuple  # tuples of input indices
    representatives: tuple
    radius2: object

    def cluster_of(self, i: int) -> int:
        for k, c in enumerate(self.clusters):
            if i in c:
                return k
        raise KeyError(i)


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cluster_at_radius(surfaces, r2, jobs: int = 1) -> ClusterReport:
    """Group surfaces by isomorphism at radius ``r``; each cluster is
    represented by its lowest index."""
    r2 = rational(r2)
    devs = _map(lambda S: _Developed(S, r2), list(surfaces), jobs)
    reps: list = []
    members: list = []
    for i, d in enumerate(devs):
        for k, j in enumerate(reps):
            if _iso(devs[j], d, r2):
                members[k].append(i)
                break
        else:
            reps.append(i)
            members.append([i])
    return ClusterReport(tuple(tuple(m) for m in members), tuple(reps), r2)


class PrecheckFailed(ValueError):
    def __init__(self, n):
        super().__init__("term %d does not contain an embedded ball of the given radius" % n)
        self.n = n


@dataclass(frozen=True)
class ProbeReport:
    clusters: ClusterReport
    terms: tuple  # the n values clustered, in order
    largest: tuple  # n values in the largest cluster
    density: tuple  # share of the largest cluster among the first k terms
    heuristic: str = "cluster recurrence is evidence only, not a proof of compactness"


def compactness_probe(seq, eps2, r2, count: int, start: int = 1, jobs: int = 1) -> ProbeReport:
    """Cluster the first ``count`` terms at radius ``r`` after checking each
    has an embedded ``eps``-ball at its basepoint."""
    eps2 = rational(eps2)
    terms = list(range(start, start + count))
    surfaces = []
    for n in terms:
        S = seq(n)
        if not embedding_radius(S).value > eps2:
            raise PrecheckFailed(n)
        surfaces.append(S)
    rep = cluster_at_radius(surfaces, r2, jobs)
    big = max(rep.clusters, key=lambda c: (len(c), -c[0]))
    largest = tuple(terms[i] for i in big)
    members = set(big)
    density = tuple(
        rational(sum(1 for i in range(k) if i in members)) / k for k in range(1, count + 1)
    )
    return ProbeReport(rep, tuple(terms), largest, density)
