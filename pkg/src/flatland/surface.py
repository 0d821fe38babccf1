"""Translation surfaces presented as convex rational polygons glued by
translations.

Edge ``i`` of a polygon joins vertex ``i`` to vertex ``i+1``.  A gluing pairs
two edges of opposite direction; the translation carrying one onto the other
is always recomputed from the vertices, so it never goes stale.

Corner classes whose total angle is ``2*pi*k`` with ``k >= 2`` are cone
points.  They are not points of the surface (they are punctures) and every
algorithm in the package treats running into one as an event.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from gmpy2 import mpq
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .geometry import (
    Vec,
    area2,
    cross,
    dot,
    is_convex_ccw,
    locate,
    rational,
)

EdgeRef = tuple  # (polygon id, edge index)

DEFAULT_CORNER_CAP = 10_000


class InvalidPresentation(ValueError):
    pass


class MarkAtPuncture(ValueError):
    pass


def _in_arc(u, v, w) -> bool:
    """``w`` in the half-open ccw arc ``(u, v]`` where the arc is strictly
    between zero and one full turn and at most a half turn."""
    cuv = cross(u, v)
    cwv = cross(w, v)
    if cwv == 0 and dot(w, v) > 0:
        return True
    if cuv == 0:  # half turn
        return cross(u, w) > 0
    return cross(u, w) > 0 and cwv > 0


class TranslationSurface:
    """Common interface for finite presentations, lazy providers and the plane.

    Subclasses supply :meth:`polygon` and :meth:`opposite`.
    """

    is_plane = False
    is_finite = False
    name = ""
    basepoint: tuple

    def polygon(self, pid) -> tuple[Vec, ...]:
        raise NotImplementedError

    def opposite(self, pid, edge) -> Optional[EdgeRef]:
        raise NotImplementedError

    def edge_shift(self, pid, edge) -> Vec:
        """Vector ``t`` with ``x + t`` the glued copy of a point ``x`` on the
        given edge, expressed in the coordinates of the opposite polygon."""
        q, f = self.opposite(pid, edge)
        P, Q = self.polygon(pid), self.polygon(q)
        return Q[(f + 1) % len(Q)] - P[edge]

    # -- corners -------------------------------------------------------------

    corner_cap = DEFAULT_CORNER_CAP

    def _walk_corners(self, pid, vertex):
        cycle = [(pid, vertex)]
        p, v = pid, vertex
        while True:
            n = len(self.polygon(p))
            opp = self.opposite(p, (v - 1) % n)
            if opp is None:
                return cycle, False
            p, v = opp
            if (p, v) == (pid, vertex):
                return cycle, True
            cycle.append((p, v))
            if len(cycle) > self.corner_cap:
                return cycle, False

    def corner_cycle(self, pid, vertex):
        """Corners met turning counterclockwise about a vertex, starting at
        ``(pid, vertex)``.  Returns ``None`` if the walk hits an unglued edge
        or exceeds ``corner_cap`` corners."""
        cycle, closed = self._walk_corners(pid, vertex)
        return cycle if closed else None

    def cone_order(self, pid, vertex) -> Optional[int]:
        """Total angle at the corner's class divided by ``2*pi``; ``None`` for
        boundary or unbounded classes.

        Counted by following the outgoing edge direction of each corner and
        counting how often it sweeps past the starting direction.
        """
        cache = self.__dict__.setdefault("_cone_cache", {})
        key = (pid, vertex)
        if key in cache:
            return cache[key]
        cycle, closed = self._walk_corners(pid, vertex)
        if not closed:
            order = None
        else:
            dirs = []
            for p, v in cycle:
                P = self.polygon(p)
                n = len(P)
                dirs.append((P[(v + 1) % n] - P[v], P[(v - 1) % n] - P[v]))
            ref = dirs[0][0]
            order = sum(1 for out, back in dirs if _in_arc(out, back, ref))
        for c in cycle:
            cache[c] = order
        return order

    def is_puncture(self, pid, vertex) -> bool:
        return self.cone_order(pid, vertex) != 1

    def punctures(self, pid) -> list[int]:
        return [i for i in range(len(self.polygon(pid))) if self.is_puncture(pid, i)]

    def representations(self, pid, point) -> list[tuple]:
        """Every ``(polygon, point)`` naming the same surface point."""
        P = self.polygon(pid)
        kind, i = locate(P, point)
        if kind == "outside":
            raise ValueError("point %r is not in polygon %r" % (point, pid))
        if kind == "interior":
            return [(pid, point)]
        if kind == "edge":
            opp = self.opposite(pid, i)
            if opp is None:
                return [(pid, point)]
            return [(pid, point), (opp[0], point + self.edge_shift(pid, i))]
        cycle = self.corner_cycle(pid, i)
        if cycle is None:
            return [(pid, point)]
        return [(q, self.polygon(q)[w]) for q, w in cycle]

    def is_singular_point(self, pid, point) -> bool:
        kind, i = locate(self.polygon(pid), point)
        return kind == "vertex" and self.is_puncture(pid, i)

    def with_basepoint(self, point) -> "TranslationSurface":
        raise NotImplementedError


class SurfacePresentation(TranslationSurface):
    """A finite gluing of convex polygons with a basepoint.

    Construction does not validate; call :func:`validate` or use one of the
    builders in :mod:`flatland.families`.
    """

    is_finite = True

    def __init__(self, polygons: Mapping[int, Sequence], gluings: Iterable, basepoint, name: str = ""):
        self.polygons = {int(k): tuple(Vec.of(*v) for v in vs) for k, vs in polygons.items()}
        self.gluing_pairs = tuple(
            ((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in gluings
        )
        self._opp = {}
        for a, b in self.gluing_pairs:
            self._opp.setdefault(a, b)
            self._opp.setdefault(b, a)
        pid, pt = basepoint
        self.basepoint = (int(pid), Vec.of(*pt))
        self.name = name

    def polygon(self, pid):
        return self.polygons[pid]

    def opposite(self, pid, edge):
        return self._opp.get((pid, edge))

    def gluings(self) -> list[tuple[EdgeRef, EdgeRef]]:
        """Canonical list of glued pairs (smaller edge first)."""
        seen = set()
        out = []
        for a, b in self.gluing_pairs:
            pair = tuple(sorted((a, b)))
            if pair not in seen:
                seen.add(pair)
                out.append(pair)
        return sorted(out)

    def with_basepoint(self, point):
        return SurfacePresentation(self.polygons, self.gluing_pairs, point, self.name)

    def _key(self):
        return (
            tuple(sorted(self.polygons.items())),
            tuple(self.gluings()),
            self.basepoint,
            self.name,
        )

    def __eq__(self, other):
        return isinstance(other, SurfacePresentation) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "SurfacePresentation(%r, %d polygons)" % (self.name, len(self.polygons))


class SurfaceProvider(TranslationSurface):
    """A possibly infinite surface described by two pure functions.

    ``polygon_fn(pid)`` returns the vertex list of polygon ``pid`` and
    ``opposite_fn(pid, edge)`` its glued partner.  Answers are memoised, so
    the functions must be deterministic.
    """

    corner_cap = 500

    def __init__(self, polygon_fn: Callable, opposite_fn: Callable, basepoint, name: str = ""):
        self._polygon_fn = polygon_fn
        self._opposite_fn = opposite_fn
        self._polys: dict = {}
        pid, pt = basepoint
        self.basepoint = (pid, Vec.of(*pt))
        self.name = name

    def polygon(self, pid):
        if pid not in self._polys:
            self._polys[pid] = tuple(Vec.of(*v) for v in self._polygon_fn(pid))
        return self._polys[pid]

    def opposite(self, pid, edge):
        return self._opposite_fn(pid, edge)

    def with_basepoint(self, point):
        return SurfaceProvider(self._polygon_fn, self._opposite_fn, point, self.name)

    def __eq__(self, other):
        return (isinstance(other, SurfaceProvider)
                and (self._polygon_fn, self._opposite_fn, self.basepoint, self.name)
                == (other._polygon_fn, other._opposite_fn, other.basepoint, other.name))

    def __hash__(self):
        return hash((self._polygon_fn, self._opposite_fn, self.basepoint, self.name))

    def __repr__(self):
        return "SurfaceProvider(%r)" % self.name


class Plane(TranslationSurface):
    """The plane, its own single chart.  It has no polygons and no vertices."""

    is_plane = True
    name = "plane"

    def __init__(self, basepoint=(0, (0, 0))):
        self.basepoint = (0, Vec.of(*basepoint[1]))

    def polygon(self, pid):
        raise ValueError("the plane has no polygons")

    def opposite(self, pid, edge):
        return None

    def representations(self, pid, point):
        return [(0, Vec.of(*point))]

    def is_singular_point(self, pid, point):
        return False

    def with_basepoint(self, point):
        return Plane((0, point[1]))

    def __eq__(self, other):
        return isinstance(other, Plane) and other.basepoint == self.basepoint

    def __hash__(self):
        return hash(("plane", self.basepoint))

    def __repr__(self):
        return "Plane()"


@dataclass(frozen=True)
class MarkedSurface:
    surface: TranslationSurface
    mark: tuple

    def __post_init__(self):
        object.__setattr__(self, "mark", (self.mark[0], Vec.of(*self.mark[1])))


# -- validation --------------------------------------------------------------


class Violation(NamedTuple):
    kind: str
    where: Hashable
    detail: str = ""


class ValidationReport(list):
    @property
    def ok(self) -> bool:
        return not self

    def kinds(self) -> list[str]:
        return [v.kind for v in self]


def validate(p: SurfacePresentation) -> ValidationReport:
    """Collect every problem with a finite presentation.  Never raises."""
    report = ValidationReport()
    try:
        _validate(p, report)
    except Exception as exc:  # malformed beyond what the checks anticipate
        report.append(Violation("malformed", None, repr(exc)))
    return report


def _validate(p: SurfacePresentation, report: ValidationReport) -> None:
    polys = p.polygons
    if not polys:
        report.append(Violation("empty", None, "no polygons"))
        return
    for pid, verts in sorted(polys.items()):
        if len(verts) < 3 or len(set(verts)) != len(verts) or not is_convex_ccw(verts):
            report.append(Violation("non-convex polygon", pid))

    def edge_ok(ref):
        return ref[0] in polys and 0 <= ref[1] < len(polys[ref[0]])

    uses: dict = {}
    for a, b in p.gluing_pairs:
        for ref in (a, b):
            uses[ref] = uses.get(ref, 0) + 1
    for ref, count in sorted(uses.items()):
        if not edge_ok(ref):
            report.append(Violation("bad edge reference", ref))
        elif count > 1:
            report.append(Violation("edge glued twice", ref))
    for pid, verts in sorted(polys.items()):
        for e in range(len(verts)):
            if (pid, e) not in uses:
                report.append(Violation("unpaired edge", (pid, e)))
    for a, b in p.gluing_pairs:
        if not (edge_ok(a) and edge_ok(b)):
            continue
        A, B = polys[a[0]], polys[b[0]]
        ea = A[(a[1] + 1) % len(A)] - A[a[1]]
        eb = B[(b[1] + 1) % len(B)] - B[b[1]]
        if cross(ea, eb) != 0 or dot(ea, eb) >= 0:
            report.append(Violation("paired edges not parallel", (a, b),
                                    "edges must be parallel with opposite orientation"))
        elif ea.norm2() != eb.norm2():
            report.append(Violation("length mismatch", (a, b)))

    # connectivity of the gluing graph
    start = min(polys)
    seen = {start}
    todo = deque([start])
    while todo:
        q = todo.popleft()
        for e in range(len(polys[q])):
            opp = p.opposite(q, e)
            if opp is not None and opp[0] in polys and opp[0] not in seen:
                seen.add(opp[0])
                todo.append(opp[0])
    if len(seen) != len(polys):
        report.append(Violation("disconnected", sorted(set(polys) - seen)))

    bpid, bpt = p.basepoint
    if bpid not in polys:
        report.append(Violation("basepoint outside", bpid, "no such polygon"))
        return
    kind, i = locate(polys[bpid], bpt)
    if kind == "outside":
        report.append(Violation("basepoint outside", bpid))
    elif kind == "vertex" and not report:
        if p.cone_order(bpid, i) != 1:
            report.append(Violation("basepoint in singular class", (bpid, i)))


def check(p: SurfacePresentation) -> SurfacePresentation:
    report = validate(p)
    if not report.ok:
        raise InvalidPresentation("; ".join("%s at %s" % (v.kind, v.where) for v in report))
    return p


class VertexClassReport(NamedTuple):
    corners: tuple
    cone_order: Optional[int]  # None: boundary


def vertex_links(p: SurfacePresentation) -> list[VertexClassReport]:
    """Partition the corners into vertex classes with their cone orders."""
    check(p)
    done = set()
    out = []
    for pid in sorted(p.polygons):
        for v in range(len(p.polygons[pid])):
            if (pid, v) in done:
                continue
            cycle = p.corner_cycle(pid, v)
            order = p.cone_order(pid, v)
            corners = tuple(sorted(cycle))
            done.update(corners)
            out.append(VertexClassReport(corners, order))
    return out


def total_angle_turns(p: SurfacePresentation) -> mpq:
    """Sum of all interior angles divided by ``2*pi``; independent of the
    gluings (each n-gon contributes ``(n-2)/2``)."""
    return sum((mpq(len(v) - 2, 2) for v in p.polygons.values()), mpq(0))


def euler_characteristic(p: SurfacePresentation) -> int:
    """``V - E + F`` of the glued complex, counting cone points as vertices."""
    V = len(vertex_links(p))
    E = len(p.gluings())
    F = len(p.polygons)
    return V - E + F


def polygon_area(p: TranslationSurface, pid) -> mpq:
    return area2(p.polygon(pid)) / 2


def as_point(pid, point) -> tuple:
    return (pid, Vec.of(*point))


def rat_point(x, y) -> Vec:
    return Vec(rational(x), rational(y))
