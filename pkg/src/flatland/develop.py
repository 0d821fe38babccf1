"""Developing maps, immersions of disks, embeddings and embedding radii.

Developed coordinates put the basepoint at the origin.  A cell of a
developed complex is a convex polygon in those coordinates; cells coming
from a surface remember which polygon they copy and the placement ``a`` with
``cell = polygon + a``.

Continuation of an immersion ``D -> S`` is carried out on *pieces*: a piece
is a triple (cell of D, polygon of S, offset ``a``) whose region is the part
of the cell covered by ``polygon + a``.  Pieces spread across edges of S and
across shared segments of D until nothing new appears.  Because the result
is a closure, it does not depend on the traversal order.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from gmpy2 import mpq
from functools import cmp_to_key
from math import isqrt
from typing import Mapping, NamedTuple, Optional, Union

from .geometry import (
    ZERO,
    Mat2,
    Rect,
    RectUnion,
    Vec,
    area2,
    balanced_point,
    clip,
    clip_segment,
    contains,
    cross,
    dot,
    exit_edge,
    locate,
    minkowski_sum,
    nearest_point,
    project_to_segment,
    rational,
    shared_segments,
    translate,
)
from .surface import TranslationSurface

DEFAULT_CELL_CAP = 100_000
INFINITE = math.inf

SqRadius = Union[mpq, float]  # an mpq, or math.inf


class NonTermination(RuntimeError):
    pass


class RadiusTooLarge(ValueError):
    pass


class RegionTouchesPuncture(ValueError):
    pass


def cell_cap() -> int:
    return int(os.environ.get("FLATLAND_CELL_CAP", DEFAULT_CELL_CAP))


# -- ordering of witnesses -----------------------------------------------------


def _half(p) -> int:
    return 0 if p[1] > 0 or (p[1] == 0 and p[0] >= 0) else 1


def _polar_cmp(p, q) -> int:
    """Nearer to the origin first, then by angle counterclockwise from +x."""
    np_, nq = p[0] * p[0] + p[1] * p[1], q[0] * q[0] + q[1] * q[1]
    if np_ != nq:
        return -1 if np_ < nq else 1
    hp, hq = _half(p), _half(q)
    if hp != hq:
        return hp - hq
    c = cross(p, q)
    return -1 if c > 0 else (1 if c < 0 else 0)


polar_key = cmp_to_key(_polar_cmp)


# -- developed complexes -------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    id: object
    source: object  # polygon id of the surface copied, or None
    placement: Vec
    vertices: tuple
    marks: tuple = ()  # punctures at corners, developed coordinates

    @property
    def area(self) -> mpq:
        return area2(self.vertices) / 2


def _segment_exit(poly, x):
    """Largest ``t <= 1`` with ``t x`` in the convex polygon, assuming the
    segment is inside it at its start parameter."""
    hi = mpq(1)
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        c0, c1 = cross(b - a, ZERO - a), cross(b - a, x)
        if c1 < 0:
            hi = min(hi, -c0 / c1)
    return hi


@dataclass(frozen=True, eq=False)
class DevelopedComplex:
    """Cells glued along shared segments, placed in the plane.

    ``adjacency[c]`` lists ``(other, (p, q))`` for every segment of positive
    length along which cell ``c`` is glued to ``other``.
    """

    cells: tuple
    adjacency: Mapping
    basepoint_cell: object
    radius2: Optional[SqRadius] = None
    singular_marks: tuple = ()
    region: Optional[RectUnion] = None
    is_disk: bool = True
    name: str = ""
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index.update({c.id: c for c in self.cells})

    def same_as(self, other: "DevelopedComplex") -> bool:
        """Same cells, gluings and basepoint cell (identity is not required)."""
        if not isinstance(other, DevelopedComplex):
            return False
        if self.cells != other.cells or self.basepoint_cell != other.basepoint_cell:
            return False

        def adj(c):
            return {k: sorted((o, tuple(seg)) for o, seg in v) for k, v in c.adjacency.items()}

        return adj(self) == adj(other)

    # constructors

    @classmethod
    def from_rect_union(cls, u: RectUnion, name: str = "") -> "DevelopedComplex":
        if not u.contains(ZERO):
            raise ValueError("the basepoint (0,0) is not in the rectangle union")
        cells = tuple(Cell(i, None, ZERO, r.vertices()) for i, r in enumerate(u.rects))
        adj: dict = {i: [] for i in range(len(cells))}
        for i, r in enumerate(u.rects):
            for j, s in enumerate(u.rects):
                if i != j:
                    seg = shared_segments(r, s)
                    if seg is not None:
                        adj[i].append((j, seg))
        base = min(i for i, r in enumerate(u.rects) if r.contains(ZERO))
        return cls(cells, {k: tuple(v) for k, v in adj.items()}, base,
                   region=u, is_disk=u.is_disk, name=name)

    @classmethod
    def from_rects(cls, rects, name: str = "") -> "DevelopedComplex":
        from .geometry import rect_union_normalize

        return cls.from_rect_union(rect_union_normalize(rects), name)

    @classmethod
    def square_disk(cls, half) -> "DevelopedComplex":
        """The closed square ``[-half, half]^2``."""
        return cls.from_rects([Rect.square(ZERO, half)])

    # queries

    def cell(self, cid) -> Cell:
        return self._index[cid]

    def _star(self, cells, p) -> set:
        """Cells holding ``p`` and joined to ``cells`` through segments holding ``p``."""
        seen = set(cells)
        todo = list(cells)
        while todo:
            c = todo.pop()
            for other, (a, b) in self.neighbors(c):
                if other not in seen and cross(b - a, p - a) == 0 and dot(p - a, p - b) <= 0:
                    seen.add(other)
                    todo.append(other)
        return seen

    def sees(self, cid, x) -> bool:
        """The straight segment from the basepoint to ``x`` runs inside the
        complex, avoiding marks, and ends at the copy of ``x`` in cell ``cid``."""
        x = Vec.of(*x)
        here = self._star([self.basepoint_cell], ZERO)
        t = ZERO.x
        while True:
            best, reach = t, []
            for c in here:
                hi = _segment_exit(self.cell(c).vertices, x)
                if hi > best:
                    best, reach = hi, [c]
                elif hi == best and hi > t:
                    reach.append(c)
            if not reach:
                return False
            if best >= 1:
                return cid in self._star(reach, x)
            p = x * best
            if any(p in self.cell(c).marks for c in reach):
                return False
            here, t = self._star(reach, p), best

    def neighbors(self, cid):
        return self.adjacency.get(cid, ())

    def cell_ids(self):
        return [c.id for c in self.cells]

    def cells_around_basepoint(self) -> list[Cell]:
        return [c for c in self.cells if contains(c.vertices, ZERO)]

    def area(self) -> mpq:
        return sum((c.area for c in self.cells), mpq(0))

    def contains(self, p) -> bool:
        return any(contains(c.vertices, p) for c in self.cells)

    def is_interior(self, p) -> bool:
        """``p`` lies in the topological interior of the complex."""
        if self.region is not None:
            return self.region.contains_interior(p)
        holders = [c for c in self.cells if contains(c.vertices, p)]
        if not holders:
            return False
        for c in holders:
            n = len(c.vertices)
            for i in range(n):
                a, b = c.vertices[i], c.vertices[(i + 1) % n]
                if cross(b - a, p - a) != 0 or dot(p - a, p - b) > 0:
                    continue
                glued = any(
                    cross(b - a, s[0] - a) == 0 and cross(b - a, s[1] - a) == 0
                    and dot(p - s[0], p - s[1]) <= 0
                    for _, s in self.neighbors(c.id)
                )
                if not glued:
                    return False
        return True

    def is_planar(self) -> bool:
        """No two cells overlap in the plane."""
        cells = self.cells
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                inter = clip(cells[i].vertices, cells[j].vertices)
                if len(inter) >= 3 and area2(inter) > 0:
                    return False
        return True

    def transform(self, A: Mat2) -> "DevelopedComplex":
        """Image under a linear map with positive determinant."""
        if A.det() <= 0:
            raise ValueError("complexes only transform by orientation preserving maps")
        cells = tuple(
            Cell(c.id, c.source, A(c.placement), tuple(A(v) for v in c.vertices),
                 tuple(A(m) for m in c.marks))
            for c in self.cells
        )
        adj = {k: tuple((o, (A(s[0]), A(s[1]))) for o, s in v) for k, v in self.adjacency.items()}
        return DevelopedComplex(cells, adj, self.basepoint_cell, None,
                                tuple(A(m) for m in self.singular_marks), None,
                                self.is_disk, self.name)

    def __repr__(self):
        return "DevelopedComplex(%d cells%s)" % (
            len(self.cells), ", %r" % self.name if self.name else "")


def as_complex(d) -> DevelopedComplex:
    if isinstance(d, DevelopedComplex):
        return d
    if isinstance(d, RectUnion):
        return DevelopedComplex.from_rect_union(d)
    if isinstance(d, Rect):
        return DevelopedComplex.from_rects([d])
    raise TypeError("expected a DevelopedComplex, RectUnion or Rect, got %r" % (d,))


# -- development about the basepoint -------------------------------------------


def _plane_radius(r2) -> int:
    R = max(1, isqrt(math.ceil(r2)))
    while R * R < r2:
        R += 1
    return R


def develop_disk(S: TranslationSurface, r2, cap: Optional[int] = None) -> DevelopedComplex:
    """Develop the closed disk of squared radius ``r2`` about the basepoint.

    Starting from the polygons around the basepoint, an edge is crossed when
    it faces away from the origin and meets the closed disk at a point that
    is not a puncture.  Each polygon copy is identified by its polygon and
    placement, so cell ids are the same at every radius.
    """
    r2 = rational(r2)
    cap = cell_cap() if cap is None else cap
    if S.is_plane:
        R = _plane_radius(r2)
        sq = Rect.square(ZERO, R)
        cell = Cell(0, None, ZERO, sq.vertices())
        return DevelopedComplex((cell,), {0: ()}, 0, r2, name="plane")

    bpid, bpt = S.basepoint
    seeds = sorted((Vec(-w.x, -w.y), q) for q, w in S.representations(bpid, bpt))
    found: dict = {}
    frontier = []
    for a, q in seeds:
        key = (q, a)
        if key not in found:
            found[key] = None
            frontier.append(key)
    while frontier:
        frontier.sort(key=lambda k: (k[1], k[0]))
        nxt = []
        for pid, a in frontier:
            P = S.polygon(pid)
            n = len(P)
            for e in range(n):
                A, B = P[e] + a, P[(e + 1) % n] + a
                if cross(B - A, -A) <= 0:
                    continue
                near = project_to_segment(A, B, ZERO)
                d2 = near.norm2()
                if d2 > r2:
                    continue
                if d2 == r2 and ((near == A and S.is_puncture(pid, e))
                                 or (near == B and S.is_puncture(pid, (e + 1) % n))):
                    continue
                opp = S.opposite(pid, e)
                if opp is None:
                    continue
                key = (opp[0], a - S.edge_shift(pid, e))
                if key not in found:
                    found[key] = None
                    nxt.append(key)
                    if len(found) > cap:
                        raise NonTermination(
                            "develop exceeded the cell cap of %d cells" % cap)
        frontier = nxt

    cells = []
    for pid, a in found:
        P = S.polygon(pid)
        marks = tuple(P[i] + a for i in S.punctures(pid))
        cells.append(Cell((pid, a.x, a.y), pid, a, translate(P, a), marks))
    cells.sort(key=lambda c: (c.placement, c.source))
    by_key = {(c.source, c.placement): c.id for c in cells}
    adj = {}
    for c in cells:
        P = S.polygon(c.source)
        n = len(P)
        out = []
        for e in range(n):
            opp = S.opposite(c.source, e)
            if opp is None:
                continue
            other = by_key.get((opp[0], c.placement - S.edge_shift(c.source, e)))
            if other is not None and other != c.id:
                out.append((other, (c.vertices[e], c.vertices[(e + 1) % n])))
        adj[c.id] = tuple(out)
    marks = sorted({m for c in cells for m in c.marks if m.norm2() < r2}, key=polar_key)
    base = min(c.id for c in cells if contains(c.vertices, ZERO))
    return DevelopedComplex(tuple(cells), adj, base, r2, tuple(marks),
                            name=getattr(S, "name", ""))


# -- tracing -------------------------------------------------------------------


class Endpoint(NamedTuple):
    polygon: object
    point: Vec


class HitPuncture(NamedTuple):
    polygon: object
    vertex: int
    point: Vec
    distance2: mpq


def _exact_sqrt(q: mpq) -> Optional[mpq]:
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return mpq(n, d)
    return None


def _sector_for(S, pid, vertex, direction):
    """The corner of the vertex class whose sector contains ``direction``."""
    for q, w in S.corner_cycle(pid, vertex):
        Q = S.polygon(q)
        n = len(Q)
        out, back = Q[(w + 1) % n] - Q[w], Q[(w - 1) % n] - Q[w]
        if cross(out, direction) >= 0 and cross(direction, back) > 0:
            return q, Q[w]
        if cross(out, direction) == 0 and dot(out, direction) > 0:
            return q, Q[w]
    raise AssertionError("no sector contains the direction")


def trace(S: TranslationSurface, start, direction, length2, cap: Optional[int] = None):
    """Follow the straight line from ``start`` in ``direction`` for the given
    squared length.

    ``length2 / |direction|^2`` must be the square of a rational so that the
    endpoint is rational.
    """
    direction = Vec.of(*direction)
    if direction == ZERO:
        from .geometry import ZeroDirection

        raise ZeroDirection("direction must be nonzero")
    T = _exact_sqrt(rational(length2) / direction.norm2())
    if T is None:
        raise ValueError("length is not a rational multiple of the direction")
    pid, x = start[0], Vec.of(*start[1])
    if S.is_plane:
        return Endpoint(pid, x + direction * T)
    cap = cell_cap() if cap is None else cap
    travelled = mpq(0)
    for _ in range(cap):
        P = S.polygon(pid)
        n = len(P)
        kind, i = locate(P, x)
        if kind == "vertex":
            if S.is_puncture(pid, i):
                return HitPuncture(pid, i, x, travelled * travelled * direction.norm2())
            pid, x = _sector_for(S, pid, i, direction)
            P = S.polygon(pid)
            n = len(P)
        elif kind == "edge":
            e = P[(i + 1) % n] - P[i]
            if cross(e, direction) < 0:  # heading out through this edge
                shift = S.edge_shift(pid, i)
                pid = S.opposite(pid, i)[0]
                x = x + shift
                continue
        if travelled == T:
            return Endpoint(pid, x)
        ex = exit_edge(P, x, direction)
        if travelled + ex.t > T:
            return Endpoint(pid, x + direction * (T - travelled))
        travelled += ex.t
        x = ex.point
        if ex.vertex is None and travelled < T:
            shift = S.edge_shift(pid, ex.edge)
            pid = S.opposite(pid, ex.edge)[0]
            x = x + shift
        elif ex.vertex is not None and S.is_puncture(pid, ex.vertex):
            return HitPuncture(pid, ex.vertex, x, travelled * travelled * direction.norm2())
    raise NonTermination("trace exceeded %d crossings" % cap)


# -- targets for continuation ------------------------------------------------------


class _SurfaceTarget:
    def __init__(self, S: TranslationSurface):
        self.S = S
        self._cross: dict = {}
        self._punct: dict = {}

    def seeds(self):
        pid, y = self.S.basepoint
        return [(q, -w) for q, w in self.S.representations(pid, y)]

    def polygon(self, key):
        return self.S.polygon(key)

    def crossings(self, key):
        if key not in self._cross:
            P = self.S.polygon(key)
            n = len(P)
            out = []
            for e in range(n):
                opp = self.S.opposite(key, e)
                if opp is not None:
                    out.append((P[e], P[(e + 1) % n], opp[0], self.S.edge_shift(key, e)))
            self._cross[key] = out
        return self._cross[key]

    def punctures(self, key):
        if key not in self._punct:
            P = self.S.polygon(key)
            self._punct[key] = [P[i] for i in self.S.punctures(key)]
        return self._punct[key]

    def representations(self, key, point):
        return self.S.representations(key, point)


class _ComplexTarget:
    def __init__(self, C: DevelopedComplex):
        self.C = C

    def seeds(self):
        return [(c.id, ZERO) for c in self.C.cells_around_basepoint()]

    def polygon(self, key):
        return self.C.cell(key).vertices

    def crossings(self, key):
        return [(s[0], s[1], other, ZERO) for other, s in self.C.neighbors(key)]

    def punctures(self, key):
        return list(self.C.cell(key).marks)

    def representations(self, key, point):
        seen = {key}
        todo = [key]
        while todo:
            k = todo.pop()
            for other, s in self.C.neighbors(k):
                if other not in seen and cross(s[1] - s[0], point - s[0]) == 0 \
                        and dot(point - s[0], point - s[1]) <= 0:
                    seen.add(other)
                    todo.append(other)
        return [(k, point) for k in sorted(seen, key=repr)]


def target_adapter(T):
    if isinstance(T, DevelopedComplex):
        return _ComplexTarget(T)
    return _SurfaceTarget(T)


# -- immersion -------------------------------------------------------------------


class Piece(NamedTuple):
    cell: object
    target: object
    offset: Vec
    region: tuple


@dataclass(frozen=True, eq=False)
class ImmersionMap:
    """The immersion of a disk complex, as the pieces it is cut into.

    ``placements[c]`` lists the ``(target polygon, offset)`` pairs used on
    cell ``c``; a point ``x`` of a piece maps to ``x - offset`` in its target
    polygon.
    """

    source: DevelopedComplex
    target: object
    pieces: tuple

    def __bool__(self):
        return True

    @property
    def placements(self) -> dict:
        out: dict = defaultdict(list)
        for p in self.pieces:
            out[p.cell].append((p.target, p.offset))
        return {c: tuple(sorted(v, key=lambda t: (t[1], repr(t[0])))) for c, v in out.items()}

    def apply(self, cell, point):
        point = Vec.of(*point)
        for p in self.pieces:
            if p.cell == cell and contains(p.region, point):
                return p.target, point - p.offset
        raise ValueError("point %r is not in cell %r" % (point, cell))

    def __repr__(self):
        return "ImmersionMap(%d cells, %d pieces -> %r)" % (
            len(self.source.cells), len(self.pieces), getattr(self.target, "name", self.target))

    def with_target(self, target) -> "ImmersionMap":
        return ImmersionMap(self.source, target, self.pieces)


@dataclass(frozen=True)
class NoImmersion:
    witness: Vec
    reason: str
    cell: object = None

    def __bool__(self):
        return False


def _positive(seg) -> bool:
    return seg is not None and seg[0] != seg[1]


def _collinear_overlap(s, t) -> bool:
    """Two segments lie on one line and share a piece of positive length."""
    d = s[1] - s[0]
    if cross(d, t[0] - s[0]) != 0 or cross(d, t[1] - s[0]) != 0:
        return False
    lo, hi = sorted((dot(t[0] - s[0], d), dot(t[1] - s[0], d)))
    return max(lo, 0) < min(hi, d.norm2())


def immerse(D, S, *, order: str = "forward", open_region: bool = False,
            cap: Optional[int] = None):
    """Continue the germ sending the basepoint of ``D`` to that of ``S`` over
    all of ``D``.

    ``S`` may be a surface or another developed complex.  Returns an
    :class:`ImmersionMap`, or :class:`NoImmersion` carrying the obstruction
    nearest to the basepoint.  With ``open_region`` punctures on the
    boundary of ``D`` do not obstruct.
    """
    D = as_complex(D)
    if getattr(S, "is_plane", False):
        pieces = tuple(Piece(c.id, 0, ZERO, c.vertices) for c in D.cells)
        return ImmersionMap(D, S, pieces)
    cap = cell_cap() if cap is None else cap
    T = target_adapter(S)
    pieces: dict = {}
    tried: set = set()
    frontier: list = []

    def add(cid, key, a):
        k = (cid, key, a)
        if k in tried:
            return
        tried.add(k)
        region = clip(D.cell(cid).vertices, translate(T.polygon(key), a))
        if len(region) >= 3 and area2(region) > 0:
            pieces[k] = region
            frontier.append(k)
            if len(pieces) > cap:
                raise NonTermination("immersion exceeded the cap of %d pieces" % cap)

    seeds = T.seeds()
    for c in D.cells_around_basepoint():
        for key, a in seeds:
            add(c.id, key, a)
    while frontier:
        level = sorted(frontier, key=lambda k: (k[2], repr(k[1]), repr(k[0])),
                       reverse=(order == "reverse"))
        frontier.clear()
        for cid, key, a in level:
            region = pieces[(cid, key, a)]
            for p, q, other, shift in T.crossings(key):
                if _positive(clip_segment(p + a, q + a, region)):
                    add(cid, other, a - shift)
            for other, seg in D.neighbors(cid):
                shared = clip_segment(seg[0], seg[1], region)
                if not _positive(shared):
                    continue
                add(other, key, a)
                # the shared segment may run along an edge of the target polygon
                for p, q, k2, shift in T.crossings(key):
                    if _collinear_overlap(shared, (p + a, q + a)):
                        add(other, k2, a - shift)

    obstructions = _obstructions(D, T, pieces, open_region)
    if obstructions:
        # winding around a puncture causes the other kinds, so punctures win
        first = min(_REASONS[o[1]] for o in obstructions)
        x, reason, cid = min((o for o in obstructions if _REASONS[o[1]] == first),
                             key=lambda o: polar_key(o[0]))
        return NoImmersion(x, reason, cid)
    ordered = sorted(
        (Piece(cid, key, a, r) for (cid, key, a), r in pieces.items()),
        key=lambda p: (repr(p.cell), p.offset, repr(p.target)),
    )
    return ImmersionMap(D, S, tuple(ordered))


_REASONS = {"puncture": 0, "monodromy": 1, "uncovered": 2}


def _obstructions(D, T, pieces, open_region):
    out = []
    by_cell: dict = defaultdict(list)
    for (cid, key, a), region in pieces.items():
        by_cell[cid].append((key, a, region))
        marks = D.cell(cid).marks
        for v in T.punctures(key):
            x = v + a
            if x in marks or not contains(region, x):
                continue
            if open_region and not D.is_interior(x):
                continue
            out.append((x, "puncture", cid))
    for c in D.cells:
        group = by_cell.get(c.id, [])
        if not group:
            out.append((nearest_point(c.vertices, ZERO), "uncovered", c.id))
            continue
        conflict = False
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                inter = clip(group[i][2], group[j][2])
                if len(inter) >= 3 and area2(inter) > 0:
                    out.append((nearest_point(inter, ZERO), "monodromy", c.id))
                    conflict = True
        if conflict:
            continue
        if sum(area2(g[2]) for g in group) < area2(c.vertices):
            out.append((_uncovered_point(c, [g[2] for g in group]), "uncovered", c.id))
    return out


def _on_boundary(poly, p) -> bool:
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if cross(b - a, p - a) == 0 and dot(p - a, p - b) <= 0:
            return True
    return False


def _uncovered_point(cell: Cell, regions) -> Vec:
    cands = []
    for k, R in enumerate(regions):
        n = len(R)
        for i in range(n):
            m = (R[i] + R[(i + 1) % n]) / 2
            if _on_boundary(cell.vertices, m):
                continue
            if not any(contains(S, m) for j, S in enumerate(regions) if j != k):
                cands.append(m)
    if not cands:
        return nearest_point(cell.vertices, ZERO)
    return min(cands, key=polar_key)


# -- embeddings ------------------------------------------------------------------


@dataclass(frozen=True)
class Embedded:
    map: ImmersionMap

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Overlap:
    x: Vec
    y: Vec
    cells: tuple
    map: ImmersionMap = field(compare=False, repr=False, default=None)

    def __bool__(self):
        return False


def coincidences(first, second, T, distinct: bool):
    """Pairs ``(x, y, cx, cy)`` with ``x`` in a piece of ``first``, ``y`` in a
    piece of ``second`` and equal images in the target adapter ``T``.

    With ``distinct`` only pairs of different points of D are reported;
    otherwise a point lying in both is reported as ``x == y``.  Each region is
    closed, so touching along edges counts.
    """
    same = first is second
    seconds: dict = defaultdict(list)
    for j, p in enumerate(second):
        seconds[p.target].append((j, p))
    cands = []
    for i, p1 in enumerate(first):
        for j, p2 in seconds.get(p1.target, ()):
            if same and j <= i:
                continue
            if p1.offset != p2.offset:
                inter = clip(translate(p1.region, -p1.offset), translate(p2.region, -p2.offset))
                if not inter:
                    continue
                for z in (nearest_point(translate(inter, p1.offset), ZERO) - p1.offset,
                          nearest_point(translate(inter, p2.offset), ZERO) - p2.offset):
                    cands.append((z + p1.offset, z + p2.offset, p1.cell, p2.cell))
            elif distinct:
                if p1.cell != p2.cell:
                    inter = clip(p1.region, p2.region)
                    if len(inter) >= 3 and area2(inter) > 0:
                        z = nearest_point(inter, ZERO)
                        cands.append((z, z, p1.cell, p2.cell))
            else:
                inter = clip(p1.region, p2.region)
                if inter:
                    z = nearest_point(inter, ZERO)
                    cands.append((z, z, p1.cell, p2.cell))
    directions = [(first, second)] if same else [(first, second), (second, first)]
    for A, B in directions:
        groups: dict = defaultdict(list)
        for p in B:
            groups[p.target].append(p)
        flip = A is not first
        # points identified across an edge of the target
        for p1 in A:
            for a, b, other, shift in T.crossings(p1.target):
                seg = clip_segment(a + p1.offset, b + p1.offset, p1.region)
                if seg is None:
                    continue
                natural = p1.offset - shift
                for p2 in groups.get(other, ()):
                    delta = p2.offset - natural
                    if distinct and delta == ZERO:
                        continue
                    seg2 = clip_segment(seg[0] + delta, seg[1] + delta, p2.region)
                    if seg2 is None:
                        continue
                    y = project_to_segment(seg2[0], seg2[1], ZERO)
                    x = project_to_segment(seg2[0] - delta, seg2[1] - delta, ZERO)
                    for u, v in ((y - delta, y), (x, x + delta)):
                        cands.append((v, u, p2.cell, p1.cell) if flip else (u, v, p1.cell, p2.cell))
        # points identified around a regular vertex
        if isinstance(T, _SurfaceTarget):
            S = T.S
            for p1 in A:
                P = S.polygon(p1.target)
                for v in range(len(P)):
                    x = P[v] + p1.offset
                    if not contains(p1.region, x) or S.is_puncture(p1.target, v):
                        continue
                    for q, w in S.representations(p1.target, P[v]):
                        for p2 in groups.get(q, ()):
                            y = w + p2.offset
                            if (y != x or not distinct) and contains(p2.region, y):
                                cands.append((y, x, p2.cell, p1.cell) if flip
                                             else (x, y, p1.cell, p2.cell))
    return cands


def _overlap_key(c):
    x, y = c[0], c[1]
    pair = tuple(sorted((x, y)))
    return ((y - x).norm2(), min(x.norm2(), y.norm2()), pair)


def embeds(D, S, **kw):
    """Decide whether the immersion of ``D`` into ``S`` is injective.

    Returns :class:`Embedded`, :class:`Overlap` with two points of ``D``
    having the same image, or the :class:`NoImmersion` from :func:`immerse`.
    """
    im = immerse(D, S, **kw)
    if not im:
        return im
    if getattr(S, "is_plane", False):
        cands = []
        pcs = im.pieces
        for i in range(len(pcs)):
            for j in range(i + 1, len(pcs)):
                inter = clip(pcs[i].region, pcs[j].region)
                if len(inter) >= 3 and area2(inter) > 0:
                    z = nearest_point(inter, ZERO)
                    cands.append((z, z, pcs[i].cell, pcs[j].cell))
    else:
        T = target_adapter(S)
        cands = coincidences(im.pieces, im.pieces, T, distinct=True)
    if not cands:
        return Embedded(im)
    best = min(cands, key=_overlap_key)
    x, y, cx, cy = best
    if y < x or (x == y and repr(cy) < repr(cx)):
        x, y, cx, cy = y, x, cy, cx
    return Overlap(x, y, (cx, cy), im)


# -- fibers ------------------------------------------------------------------------


@dataclass(frozen=True)
class BasepointFiber:
    points: tuple  # (cell id, developed point)
    source: Optional[DevelopedComplex] = field(default=None, compare=False, repr=False)

    @property
    def offsets(self) -> tuple:
        return tuple(p for _, p in self.points)

    def visible(self) -> tuple:
        """Fiber points of a development that a straight segment reaches.

        Cells of a development are whole polygons, so a cell only partly
        in view of the basepoint can hold lifts farther away than their
        developed position suggests; those are dropped.  Other complexes
        keep every point.
        """
        D = self.source
        if D is None or D.radius2 is None:
            return self.offsets
        return tuple(p for c, p in self.points if D.sees(c, p))

    def within(self, r2) -> tuple:
        return tuple(sorted({p for p in self.visible() if p.norm2() <= r2}, key=polar_key))

    def __len__(self):
        return len(self.points)


def point_fiber(im: ImmersionMap, target_point=None) -> BasepointFiber:
    """All points of the source complex mapping to ``target_point`` (the
    target's basepoint by default)."""
    S = im.target
    if target_point is None:
        target_point = S.basepoint
    key, y = target_point[0], Vec.of(*target_point[1])
    D = im.source
    if getattr(S, "is_plane", False):
        hits = [(c.id, y) for c in D.cells if contains(c.vertices, y)]
        return BasepointFiber(_dedupe_fiber(D, hits), D)
    T = target_adapter(S)
    reps = T.representations(key, y)
    hits = []
    for p in im.pieces:
        for k, w in reps:
            if k == p.target:
                x = w + p.offset
                if contains(p.region, x):
                    hits.append((p.cell, x))
    return BasepointFiber(_dedupe_fiber(D, hits), D)


def _dedupe_fiber(D: DevelopedComplex, hits):
    """Merge hits that are the same point of D: same position and joined
    through cells that share that point."""
    by_pos: dict = defaultdict(set)
    for cid, x in hits:
        by_pos[x].add(cid)
    out = []
    for x in sorted(by_pos, key=polar_key):
        cells = by_pos[x]
        left = set(cells)
        while left:
            start = min(left, key=repr)
            comp = {start}
            todo = [start]
            while todo:
                c = todo.pop()
                for other, s in D.neighbors(c):
                    if other in left and other not in comp and cross(s[1] - s[0], x - s[0]) == 0 \
                            and dot(x - s[0], x - s[1]) <= 0:
                        comp.add(other)
                        todo.append(other)
            left -= comp
            out.append((min(comp, key=repr), x))
    return tuple(out)


# -- embedding radius --------------------------------------------------------------


@dataclass(frozen=True)
class BindingEvent:
    kinds: tuple  # subset of ("singularity", "self-overlap")
    radius2: SqRadius
    singularity: Optional[Vec] = None
    overlap: Optional[tuple] = None  # the two placements of the overlapping polygon


class EmbeddingRadius(NamedTuple):
    value: SqRadius
    event: BindingEvent


def _events(cx: DevelopedComplex, S):
    marks = [m for c in cx.cells for m in c.marks]
    sing_at = min(marks, key=polar_key) if marks else None
    sing = sing_at.norm2() if marks else None
    groups: dict = defaultdict(list)
    for c in cx.cells:
        groups[c.source].append(c.placement)
    over, over_at = None, None
    for pid, offs in groups.items():
        if len(offs) < 2:
            continue
        P = S.polygon(pid)
        for i in range(len(offs)):
            for j in range(i + 1, len(offs)):
                v, _ = balanced_point(P, -offs[i], -offs[j])
                if over is None or v < over:
                    over, over_at = v, (pid, offs[i], offs[j])
    return sing, sing_at, over, over_at


def embedding_radius(S: TranslationSurface, s=None, cap: Optional[int] = None) -> EmbeddingRadius:
    """Squared embedding radius at ``s`` (the basepoint by default).

    Develops growing disks about ``s`` until the nearest event is well inside
    the developed disk.  Events are cone points (distance to the nearest
    lift) and self-overlaps (two copies of one polygon whose closed union
    holds a pair of points at the same position of the surface, both within
    the radius).
    """
    if S.is_plane:
        return EmbeddingRadius(INFINITE, BindingEvent((), INFINITE))
    Ss = S if s is None else S.with_basepoint((s[0], Vec.of(*s[1])))
    r2 = _initial_r2(Ss)
    while True:
        cx = develop_disk(Ss, r2, cap)
        sing, sing_at, over, over_at = _events(cx, Ss)
        vals = [v for v in (sing, over) if v is not None]
        if vals:
            cand = min(vals)
            if 2 * cand <= r2:
                kinds = tuple(k for k, v in (("singularity", sing), ("self-overlap", over))
                              if v == cand)
                return EmbeddingRadius(cand, BindingEvent(
                    kinds, cand,
                    sing_at if sing == cand else None,
                    over_at if over == cand else None))
        r2 *= 4


def _initial_r2(S) -> mpq:
    # the shortest edge bounds the first self-overlap of a single polygon
    # loosely; the loop grows the disk anyway
    pid, _ = S.basepoint
    P = S.polygon(pid)
    return min((P[(i + 1) % len(P)] - P[i]).norm2() for i in range(len(P)))


def ball_embed(S: TranslationSurface, s, eps2) -> ImmersionMap:
    """The embedding of the ``eps``-ball about ``s`` into ``S``.

    The disk is developed about ``s`` and immersed into the rebased surface;
    the resulting pieces are read in the polygons of ``S`` itself.
    """
    eps2 = rational(eps2)
    if eps2 <= 0:
        raise RadiusTooLarge("the radius must be positive")
    s = (s[0], Vec.of(*s[1]))
    er = embedding_radius(S, s).value
    if not eps2 < er:
        raise RadiusTooLarge("radius^2 %s is not below the embedding radius^2 %s" % (eps2, er))
    Ss = S.with_basepoint(s)
    D = develop_disk(Ss, eps2)
    im = immerse(D, Ss)
    if not im:
        raise AssertionError("a disk below the embedding radius must immerse")
    return im.with_target(S)


def er_compact(S: TranslationSurface, region) -> SqRadius:
    """Minimum of the squared embedding radius over a compact region.

    ``region`` is a list of ``(polygon id, RectUnion | Rect | point)`` with
    each piece inside its polygon.  The embedding radius is evaluated exactly at the rectangle
    corners and at the minimisers of every event function seen from those
    corners.
    """
    if S.is_plane:
        return INFINITE
    best = None
    for pid, u in region:
        P = S.polygon(pid)
        if not isinstance(u, (RectUnion, Rect)):
            v = embedding_radius(S, (pid, Vec.of(*u))).value
            best = v if best is None else min(best, v)
            continue
        for rect in (u.rects if isinstance(u, RectUnion) else [u]):
            for i in S.punctures(pid):
                if rect.contains(P[i]):
                    raise RegionTouchesPuncture("rectangle %r touches a puncture" % (rect,))
            for c in rect.vertices():
                if not contains(P, c):
                    raise ValueError("region leaves polygon %r" % (pid,))
            cands = list(rect.vertices())
            values = {}
            for c in cands:
                values[c] = embedding_radius(S, (pid, c)).value
            bound = min(values.values())
            s0 = rect.min
            w2 = (rect.max - rect.min).norm2()
            # every event below ``bound`` is seen within this radius of s0
            cx = develop_disk(S.with_basepoint((pid, s0)), 2 * (bound + w2))
            K = translate(rect.vertices(), -s0)
            for c in cx.cells:
                for m in c.marks:
                    t = nearest_point(K, m)
                    if (m - t).norm2() < bound:
                        cands.append(t + s0)
            groups: dict = defaultdict(list)
            for c in cx.cells:
                groups[c.source].append(c.placement)
            negK = tuple(-v for v in K)
            for q, offs in groups.items():
                Q = S.polygon(q)
                M = minkowski_sum(Q, negK)
                for i in range(len(offs)):
                    for j in range(i + 1, len(offs)):
                        if (offs[i] - offs[j]).norm2() >= 4 * bound:
                            continue
                        v, u = balanced_point(M, -offs[i], -offs[j])
                        if v >= bound:
                            continue
                        ts = clip(K, translate(Q, -u))
                        if ts:
                            cands.append(ts[0] + s0)
            for c in cands:
                if c not in values:
                    values[c] = embedding_radius(S, (pid, c)).value
            m = min(values.values())
            best = m if best is None else min(best, m)
    return best
