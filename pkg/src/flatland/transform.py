"""Linear action, basepoint change, fusion and finite-radius isomorphism."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .develop import (
    Cell,
    DevelopedComplex,
    ImmersionMap,
    as_complex,
    develop_disk,
    immerse,
    point_fiber,
    polar_key,
)
from .geometry import ZERO, Mat2, Rect, Vec, contains, locate, rect_union_normalize
from .surface import (
    MarkAtPuncture,
    MarkedSurface,
    Plane,
    SurfacePresentation,
    SurfaceProvider,
    TranslationSurface,
)


class SingularMatrix(ValueError):
    pass


class OrientationReversing(ValueError):
    pass


def _check_matrix(A: Mat2) -> None:
    det = A.det()
    if det == 0:
        raise SingularMatrix("matrix %r is singular" % (A,))
    if det < 0:
        raise OrientationReversing("matrix %r reverses orientation" % (A,))


class _LinearImage:
    """Polygon function of a transformed provider.  Compares by value, so
    acting twice with equal matrices gives equal providers."""

    def __init__(self, A: Mat2, polygon_fn):
        self.A = A
        self.polygon_fn = polygon_fn

    def __call__(self, pid):
        return [self.A(Vec.of(*v)) for v in self.polygon_fn(pid)]

    def __eq__(self, other):
        return isinstance(other, _LinearImage) and (self.A, self.polygon_fn) == (
            other.A, other.polygon_fn)

    def __hash__(self):
        return hash((self.A, self.polygon_fn))


def gl2_act(A: Mat2, S):
    """Apply ``A`` to every chart.  Accepts surfaces and marked surfaces."""
    _check_matrix(A)
    if isinstance(S, MarkedSurface):
        return MarkedSurface(gl2_act(A, S.surface), (S.mark[0], A(S.mark[1])))
    if isinstance(S, Plane):
        return Plane((0, A(S.basepoint[1])))
    pid, pt = S.basepoint
    if isinstance(S, SurfacePresentation):
        polys = {k: tuple(A(v) for v in vs) for k, vs in S.polygons.items()}
        return SurfacePresentation(polys, S.gluing_pairs, (pid, A(pt)), S.name)
    if isinstance(S, SurfaceProvider):
        return SurfaceProvider(_LinearImage(A, S._polygon_fn), S._opposite_fn,
                               (pid, A(pt)), S.name)
    raise TypeError("cannot act on %r" % (S,))


def basepoint_change(m: MarkedSurface) -> TranslationSurface:
    """The same surface, based at the mark."""
    S = m.surface
    pid, pt = m.mark
    if S.is_plane:
        return S.with_basepoint(m.mark)
    kind, i = locate(S.polygon(pid), pt)
    if kind == "outside":
        raise ValueError("mark %r is not in polygon %r" % (pt, pid))
    if kind == "vertex" and S.is_puncture(pid, i):
        raise MarkAtPuncture("mark %r is a cone point" % (pt,))
    return S.with_basepoint(m.mark)


# -- fusion ---------------------------------------------------------------------


def _rects_of(C) -> list[Rect]:
    C = as_complex(C)
    if C.region is None:
        raise NotImplementedError("fusion needs complexes made of rectangles")
    return list(C.region.rects)


def fusion(P, Q) -> DevelopedComplex:
    """The smallest planar surface receiving both ``P`` and ``Q``.

    Both are cut along a common grid.  Grid squares covered by both are
    identified when they are reached from the basepoint through squares
    covered by both; the remaining squares stay on separate sheets.  When
    nothing is left on separate sheets the result is the union in the plane.
    """
    rp, rq = _rects_of(P), _rects_of(Q)
    xs = sorted({r.min.x for r in rp + rq} | {r.max.x for r in rp + rq})
    ys = sorted({r.min.y for r in rp + rq} | {r.max.y for r in rp + rq})

    def occupancy(rects):
        g = np.zeros((len(xs) - 1, len(ys) - 1), dtype=bool)
        for r in rects:
            g[xs.index(r.min.x):xs.index(r.max.x), ys.index(r.min.y):ys.index(r.max.y)] = True
        return g

    gp, gq = occupancy(rp), occupancy(rq)
    both = gp & gq
    labels, _ = ndimage.label(both)
    seeds = {
        labels[i, j]
        for i in range(len(xs) - 1) for j in range(len(ys) - 1)
        if both[i, j] and xs[i] <= 0 <= xs[i + 1] and ys[j] <= 0 <= ys[j + 1]
    }
    seeds.discard(0)
    merged = np.isin(labels, list(seeds)) & both
    if not seeds:
        raise ValueError("the basepoint germs of the two complexes do not overlap")
    if (merged == both).all():
        rects = [Rect(Vec(xs[i], ys[j]), Vec(xs[i + 1], ys[j + 1]))
                 for i in range(len(xs) - 1) for j in range(len(ys) - 1) if gp[i, j] or gq[i, j]]
        return DevelopedComplex.from_rect_union(rect_union_normalize(rects), "fusion")
    return _sheeted(xs, ys, gp, gq, merged)


def _sheeted(xs, ys, gp, gq, merged) -> DevelopedComplex:
    """Grid complex with a P sheet and a Q sheet glued along ``merged``."""

    def cid(i, j, sheet):
        return ("PQ" if merged[i, j] else sheet, i, j)

    cells = {}
    for sheet, g in (("P", gp), ("Q", gq)):
        for i in range(len(xs) - 1):
            for j in range(len(ys) - 1):
                if g[i, j]:
                    k = cid(i, j, sheet)
                    cells[k] = Cell(k, None, ZERO, Rect(Vec(xs[i], ys[j]),
                                                        Vec(xs[i + 1], ys[j + 1])).vertices())
    adj: dict = {k: set() for k in cells}
    for sheet, g in (("P", gp), ("Q", gq)):
        for i in range(len(xs) - 1):
            for j in range(len(ys) - 1):
                if not g[i, j]:
                    continue
                a = cid(i, j, sheet)
                if i + 1 < len(xs) - 1 and g[i + 1, j]:
                    b = cid(i + 1, j, sheet)
                    seg = (Vec(xs[i + 1], ys[j]), Vec(xs[i + 1], ys[j + 1]))
                    adj[a].add((b, seg))
                    adj[b].add((a, seg))
                if j + 1 < len(ys) - 1 and g[i, j + 1]:
                    b = cid(i, j + 1, sheet)
                    seg = (Vec(xs[i], ys[j + 1]), Vec(xs[i + 1], ys[j + 1]))
                    adj[a].add((b, seg))
                    adj[b].add((a, seg))
    ordered = tuple(cells[k] for k in sorted(cells))
    adjacency = {k: tuple(sorted(v)) for k, v in adj.items()}
    base = min(c.id for c in ordered if contains(c.vertices, ZERO))
    return DevelopedComplex(ordered, adjacency, base, name="fusion")


# -- isomorphism at a radius ---------------------------------------------------------


@dataclass(frozen=True)
class IsoResult:
    ok: bool
    reason: str = ""
    witness: Optional[Vec] = None
    forward: Optional[ImmersionMap] = None
    backward: Optional[ImmersionMap] = None
    fiber: tuple = ()

    def __bool__(self):
        return self.ok


def basepoint_fiber_within(D: DevelopedComplex, S, r2) -> tuple:
    im = immerse(D, S)
    if not im:
        raise AssertionError("a development must immerse into its own surface")
    return point_fiber(im).within(r2)


class _Developed:
    """A surface with its development and fiber at one radius, computed once."""

    def __init__(self, S, r2):
        self.S = S
        self.D = develop_disk(S, r2)
        self.fiber = basepoint_fiber_within(self.D, S, r2)


def _iso(a: _Developed, b: _Developed, r2) -> IsoResult:
    fwd = immerse(a.D, b.S)
    if not fwd:
        return IsoResult(False, "no immersion", fwd.witness)
    back = immerse(b.D, a.S)
    if not back:
        return IsoResult(False, "no immersion back", back.witness)
    if a.fiber != b.fiber:
        first = set(a.fiber) - set(b.fiber)
        second = set(b.fiber) - set(a.fiber)
        x = min(first, key=polar_key) if first else min(second, key=polar_key)
        return IsoResult(False, "fiber mismatch", x, fwd, back)
    return IsoResult(True, "", None, fwd, back, a.fiber)


def iso_at_radius(S, T, r2) -> IsoResult:
    """Whether the developed ``r``-disks of ``S`` and ``T`` immerse into each
    other's surface and carry the same basepoint fiber within ``r``."""
    return _iso(_Developed(S, r2), _Developed(T, r2), r2)


@dataclass(frozen=True)
class AutomorphismVerdict:
    certified: bool
    radius2: object
    witness: Optional[Vec] = None
    reason: str = ""

    def __bool__(self):
        return self.certified

    @property
    def name(self) -> str:
        return "CertifiedAtRadius" if self.certified else "RefutedAtRadius"


def is_affine_automorphism(S, A: Mat2, s, r2) -> AutomorphismVerdict:
    """Finite-radius check for an affine automorphism with derivative ``A``
    sending ``s`` to the basepoint."""
    image = gl2_act(A, basepoint_change(MarkedSurface(S, s)))
    res = iso_at_radius(S, image, r2)
    if res:
        return AutomorphismVerdict(True, r2)
    return AutomorphismVerdict(False, r2, res.witness, res.reason)

